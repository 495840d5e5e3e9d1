#pragma once

#include <optional>
#include <utility>

#include "regime/quadrature.hpp"

namespace regime {

/// Free parameters of the tanh-drift log-price diffusion
///
///   dX = nu sigma^2 tanh(nu (X - x_star)) dt + sigma dW,   S = exp(X).
///
/// sigma = 0 is representable so that the simulator can run the noiseless
/// limit; every density and probability operation requires sigma > 0.
class ModelParams {
public:
    ModelParams(double nu, double sigma, double x_star);

    double nu() const noexcept { return nu_; }
    double sigma() const noexcept { return sigma_; }
    double x_star() const noexcept { return x_star_; }
    double mu_tilde() const noexcept { return nu_ * sigma_ * sigma_; }
    double s_star() const;

    /// Parameters with the threshold given as a price instead of a log-price.
    static ModelParams from_threshold_price(double nu, double sigma, double s_star);

private:
    double nu_;
    double sigma_;
    double x_star_;
};

struct DensityQuery {
    double x;
    double x0;
    double t;
};

enum class Direction { HealthyToDistressed, DistressedToHealthy };
enum class Branch { Plus, Minus };

struct RegimeProbability {
    double value;
    std::optional<double> horizon;  // empty for the T -> infinity limit
    Direction direction;
};

/// ln cosh(z) without overflow: |z| + log1p(exp(-2|z|)) - ln 2.
double log_cosh(double z) noexcept;

double drift(const ModelParams& p, double x) noexcept;

/// Langevin potential with V(x_star) = 0, so that drift = -dV/dx.
double potential(const ModelParams& p, double x) noexcept;

// h = drift / sigma^2 and its analytic derivative.
double reduced_drift(const ModelParams& p, double x) noexcept;
double reduced_drift_derivative(const ModelParams& p, double x) noexcept;

/// U = h^2 + h' of the imaginary-time Schrodinger form. Equal to nu^2 for
/// every x in this model.
double schrodinger_potential(const ModelParams& p, double x) noexcept;

/// Exact transition density P(x, x0; t, 0) of the log-price.
double transition_density(const ModelParams& p, const DensityQuery& q);

/// Drifting-Gaussian tails of the transition density: drift +mu_tilde for
/// the Plus branch (x -> +inf), -mu_tilde for Minus.
double asymptotic_density(const ModelParams& p, const DensityQuery& q, Branch branch);

/// Truncation interval [lo, hi] that carries all but a negligible part of
/// the density mass: the hull of x0 and x_star widened by
/// 10 sigma sqrt(t) + mu_tilde t on each side.
std::pair<double, double> truncation_domain(const ModelParams& p, double x0, double t);

/// Quadrature of the transition density over its truncation domain.
quad::Result density_mass(const ModelParams& p, double x0, double t);

/// Probability of ending on the other side of x_star at time T, by quadrature
/// of the exact density. x0 == x_star is accepted for either direction.
RegimeProbability regime_transition_prob_finite(const ModelParams& p, double x0,
                                                double horizon, Direction direction);

/// T -> infinity limit of the regime transition probability:
/// [1 + (s0/s_star)^(2 nu)]^-1 healthy to distressed, and the mirror
/// image for distressed to healthy.
RegimeProbability default_prob_asymptotic(const ModelParams& p, double s0,
                                          Direction direction);

/// Regime side of a starting log-price; the threshold itself counts as healthy.
Direction outbound_direction(const ModelParams& p, double x0) noexcept;

}  // namespace regime
