#include "regime/model_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "regime/errors.hpp"

namespace regime {

ModelParams::ModelParams(double nu, double sigma, double x_star)
    : nu_(nu), sigma_(sigma), x_star_(x_star) {
    require(std::isfinite(nu) && nu >= 0.0, "nu must be finite and >= 0");
    require(std::isfinite(sigma) && sigma >= 0.0, "sigma must be finite and >= 0");
    require(std::isfinite(x_star), "x_star must be finite");
}

double ModelParams::s_star() const { return std::exp(x_star_); }

ModelParams ModelParams::from_threshold_price(double nu, double sigma, double s_star) {
    require(s_star > 0.0, "threshold price must be > 0");
    return ModelParams(nu, sigma, std::log(s_star));
}

namespace {

void require_diffusive(const ModelParams& p) {
    require(p.sigma() > 0.0, "sigma must be > 0 for density computations");
}

double gaussian_log_norm(double sigma, double t) {
    return -0.5 * std::log(2.0 * std::numbers::pi * t) - std::log(sigma);
}

}  // namespace

double log_cosh(double z) noexcept {
    const double a = std::abs(z);
    return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double drift(const ModelParams& p, double x) noexcept {
    return p.mu_tilde() * std::tanh(p.nu() * (x - p.x_star()));
}

double potential(const ModelParams& p, double x) noexcept {
    return -p.sigma() * p.sigma() * log_cosh(p.nu() * (x - p.x_star()));
}

double reduced_drift(const ModelParams& p, double x) noexcept {
    return p.nu() * std::tanh(p.nu() * (x - p.x_star()));
}

double reduced_drift_derivative(const ModelParams& p, double x) noexcept {
    // sech(z) = 2 e^-|z| / (1 + e^-2|z|)
    const double e = std::exp(-std::abs(p.nu() * (x - p.x_star())));
    const double sech = 2.0 * e / (1.0 + e * e);
    return p.nu() * p.nu() * sech * sech;
}

double schrodinger_potential(const ModelParams& p, double x) noexcept {
    const double h = reduced_drift(p, x);
    return h * h + reduced_drift_derivative(p, x);
}

double transition_density(const ModelParams& p, const DensityQuery& q) {
    require(q.t > 0.0, "density time must be > 0");
    require_diffusive(p);
    const double s2t = p.sigma() * p.sigma() * q.t;
    const double dx = q.x - q.x0;
    const double log_value = gaussian_log_norm(p.sigma(), q.t) +
                             log_cosh(p.nu() * (q.x - p.x_star())) -
                             log_cosh(p.nu() * (q.x0 - p.x_star())) -
                             dx * dx / (2.0 * s2t) - 0.5 * p.nu() * p.nu() * s2t;
    return std::exp(log_value);
}

double asymptotic_density(const ModelParams& p, const DensityQuery& q, Branch branch) {
    require(q.t > 0.0, "density time must be > 0");
    require_diffusive(p);
    const double shift = (branch == Branch::Plus ? 1.0 : -1.0) * p.mu_tilde() * q.t;
    const double dx = q.x - q.x0 - shift;
    return std::exp(gaussian_log_norm(p.sigma(), q.t) -
                    dx * dx / (2.0 * p.sigma() * p.sigma() * q.t));
}

std::pair<double, double> truncation_domain(const ModelParams& p, double x0, double t) {
    const double width = 10.0 * p.sigma() * std::sqrt(t) + p.mu_tilde() * t;
    return {std::min(x0, p.x_star()) - width, std::max(x0, p.x_star()) + width};
}

namespace {

// Domain breakpoints at the two drifting modes, the start and the threshold,
// restricted to [lo, hi].
std::vector<double> breakpoints(const ModelParams& p, double x0, double t, double lo,
                                double hi) {
    std::vector<double> pts{lo, hi};
    const double shift = p.mu_tilde() * t;
    for (double c : {x0 - shift, x0, x0 + shift, p.x_star()}) {
        if (c > lo && c < hi) pts.push_back(c);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

}  // namespace

quad::Result density_mass(const ModelParams& p, double x0, double t) {
    require(t > 0.0, "density time must be > 0");
    require_diffusive(p);
    const auto [lo, hi] = truncation_domain(p, x0, t);
    const auto pts = breakpoints(p, x0, t, lo, hi);
    return quad::integrate([&](double x) { return transition_density(p, {x, x0, t}); },
                           pts);
}

RegimeProbability regime_transition_prob_finite(const ModelParams& p, double x0,
                                                double horizon, Direction direction) {
    require(horizon > 0.0, "horizon must be > 0");
    require(std::isfinite(x0), "x0 must be finite");
    require_diffusive(p);
    if (direction == Direction::HealthyToDistressed) {
        require(x0 >= p.x_star(), "healthy-to-distressed requires x0 >= x_star");
    } else {
        require(x0 <= p.x_star(), "distressed-to-healthy requires x0 <= x_star");
    }
    const auto [lo, hi] = truncation_domain(p, x0, horizon);
    const bool below = direction == Direction::HealthyToDistressed;
    const auto pts = below ? breakpoints(p, x0, horizon, lo, p.x_star())
                           : breakpoints(p, x0, horizon, p.x_star(), hi);
    const auto r = quad::integrate(
        [&](double x) { return transition_density(p, {x, x0, horizon}); }, pts);
    return {std::clamp(r.value, 0.0, 1.0), horizon, direction};
}

RegimeProbability default_prob_asymptotic(const ModelParams& p, double s0,
                                          Direction direction) {
    require(s0 > 0.0 && std::isfinite(s0), "s0 must be a positive finite price");
    const double log_ratio = std::log(s0) - p.x_star();
    if (direction == Direction::HealthyToDistressed) {
        require(log_ratio >= 0.0, "healthy-to-distressed requires s0 >= s_star");
    } else {
        require(log_ratio <= 0.0, "distressed-to-healthy requires s0 <= s_star");
    }
    // 1 / (1 + e^z) with z = 2 nu |ln(s0/s_star)| >= 0
    const double z = 2.0 * p.nu() * std::abs(log_ratio);
    const double e = std::exp(-z);
    return {e / (1.0 + e), std::nullopt, direction};
}

Direction outbound_direction(const ModelParams& p, double x0) noexcept {
    return x0 >= p.x_star() ? Direction::HealthyToDistressed
                            : Direction::DistressedToHealthy;
}

}  // namespace regime
