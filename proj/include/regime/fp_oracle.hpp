#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "regime/model_core.hpp"

namespace regime::fp {

/// Uniform grid x_i = x_min + i dx, i = 0..n_x-1, with time step dt.
struct GridSpec {
    double x_min;
    double x_max;
    std::size_t n_x;
    double dt;

    void validate() const;
    double dx() const noexcept { return (x_max - x_min) / static_cast<double>(n_x - 1); }
    double x(std::size_t i) const noexcept { return x_min + static_cast<double>(i) * dx(); }

    /// Grid with spacing `dx` covering [x_min, x_max] (x_max rounded up to a
    /// whole number of cells).
    static GridSpec with_spacing(double x_min, double x_max, double dx, double dt);
};

struct DensityField {
    GridSpec grid;
    std::vector<double> values;
    double time = 0.0;
    double most_negative = 0.0;  // smallest value seen before clamping, over all steps

    /// Trapezoidal integral of the field.
    double mass() const;
    /// Piecewise-linear interpolation; zero outside the grid.
    double at(double x) const;
};

/// Crank-Nicolson solution of dP/dt = (sigma^2/2) P'' - (mu P)' with a
/// centered conservative flux and zero-density boundaries. The delta start
/// is replaced by a Gaussian of width about 2 dx, interpreted as the
/// short-time kernel at the whole number of steps matching that width.
///
/// Rejects grids whose margin around x0 is below 5 sigma sqrt(T) + mu_tilde T,
/// horizons that are not a whole number of steps, and grids with cell Peclet
/// number max|mu| dx / (sigma^2/2) >= 2, where the centered flux loses
/// positivity.
DensityField solve_fp(const ModelParams& p, double x0, double horizon, const GridSpec& grid);

/// Trapezoidal integral of the field over x <= x_star (healthy to distressed)
/// or x >= x_star (distressed to healthy).
double fp_transition_prob(const DensityField& field, double x_star, Direction direction);

/// CSV dump with header `x,density`.
void write_field_csv(const DensityField& field, std::ostream& out);

}  // namespace regime::fp
