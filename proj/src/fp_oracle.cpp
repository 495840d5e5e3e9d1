#include "regime/fp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "regime/errors.hpp"

namespace regime::fp {

void GridSpec::validate() const {
    require(std::isfinite(x_min) && std::isfinite(x_max) && x_min < x_max,
            "grid requires x_min < x_max");
    require(n_x >= 3, "grid requires at least 3 points");
    require(std::isfinite(dt) && dt > 0.0, "grid time step must be > 0");
}

GridSpec GridSpec::with_spacing(double x_min, double x_max, double dx, double dt) {
    require(dx > 0.0 && x_max > x_min, "grid spacing must be > 0 and x_max > x_min");
    const auto cells = static_cast<std::size_t>(std::ceil((x_max - x_min) / dx - 1e-9));
    return {x_min, x_min + static_cast<double>(cells) * dx, cells + 1, dt};
}

double DensityField::mass() const {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) sum += values[i] + values[i + 1];
    return 0.5 * grid.dx() * sum;
}

double DensityField::at(double x) const {
    if (x < grid.x_min || x > grid.x_max) return 0.0;
    const double u = (x - grid.x_min) / grid.dx();
    const auto j = std::min(static_cast<std::size_t>(u), grid.n_x - 2);
    const double w = u - static_cast<double>(j);
    return (1.0 - w) * values[j] + w * values[j + 1];
}

DensityField solve_fp(const ModelParams& p, double x0, double horizon, const GridSpec& grid) {
    grid.validate();
    require(p.sigma() > 0.0, "Fokker-Planck solve requires sigma > 0");
    require(horizon > 0.0, "horizon must be > 0");
    const double margin = 5.0 * p.sigma() * std::sqrt(horizon) + p.mu_tilde() * horizon;
    require(x0 - grid.x_min >= margin && grid.x_max - x0 >= margin,
            "grid margin around x0 is below 5 sigma sqrt(T) + mu_tilde T");
    const double ratio = horizon / grid.dt;
    require(std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio,
            "horizon must be an integer multiple of dt");
    const auto steps = static_cast<std::size_t>(std::llround(ratio));

    const std::size_t n = grid.n_x;
    const double dx = grid.dx();
    const double diff = 0.5 * p.sigma() * p.sigma();
    const double peclet = p.mu_tilde() * dx / diff;
    require(peclet < 2.0, "cell Peclet number >= 2: refine dx");

    // Operator rows L P_i = lower_i P_{i-1} + diag_i P_i + upper_i P_{i+1}.
    std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double mu_left = drift(p, grid.x(i) - 0.5 * dx);
        const double mu_right = drift(p, grid.x(i) + 0.5 * dx);
        lower[i] = mu_left / (2.0 * dx) + diff / (dx * dx);
        upper[i] = -mu_right / (2.0 * dx) + diff / (dx * dx);
        diag[i] = (mu_left - mu_right) / (2.0 * dx) - 2.0 * diff / (dx * dx);
    }

    // The Gaussian start of width ~2 dx is treated as the short-time kernel at
    // t0 = m dt: variance sigma^2 t0, centered at x0 + mu(x0) t0. The solver then
    // runs the remaining steps - m steps, so the mollifier adds no variance.
    const double target_width = 2.0 * dx;
    const auto start_steps = std::max<long long>(
        1, std::llround(target_width * target_width / (p.sigma() * p.sigma() * grid.dt)));
    require(static_cast<std::size_t>(start_steps) < steps,
            "horizon too short for the mollified initial condition");
    const double t0 = static_cast<double>(start_steps) * grid.dt;
    const double width = p.sigma() * std::sqrt(t0);
    const double center = x0 + drift(p, x0) * t0;

    DensityField field{.grid = grid, .values = std::vector<double>(n, 0.0), .time = 0.0,
                       .most_negative = 0.0};
    auto& v = field.values;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double z = (grid.x(i) - center) / width;
        v[i] = std::exp(-0.5 * z * z);
    }
    const double m0 = field.mass();
    for (double& value : v) value /= m0;

    // Implicit half: (I - dt/2 L); its coefficients do not change between steps,
    // so the Thomas forward sweep is factored once.
    const double half = 0.5 * grid.dt;
    std::vector<double> c_prime(n, 0.0), denom(n, 1.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double a = -half * lower[i];
        const double b = 1.0 - half * diag[i];
        const double c = -half * upper[i];
        denom[i] = b - a * c_prime[i - 1];
        c_prime[i] = c / denom[i];
    }

    std::vector<double> rhs(n, 0.0);
    for (auto step = static_cast<std::size_t>(start_steps); step < steps; ++step) {
        for (std::size_t i = 1; i + 1 < n; ++i) {
            rhs[i] = v[i] + half * (lower[i] * v[i - 1] + diag[i] * v[i] + upper[i] * v[i + 1]);
        }
        // forward sweep (boundary rows are identity with zero right-hand side)
        rhs[0] = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            rhs[i] = (rhs[i] - (-half * lower[i]) * rhs[i - 1]) / denom[i];
        }
        v[n - 1] = 0.0;
        for (std::size_t i = n - 2; i >= 1; --i) {
            v[i] = rhs[i] - c_prime[i] * v[i + 1];
        }
        v[0] = 0.0;
        for (double& value : v) {
            if (value < 0.0) {
                field.most_negative = std::min(field.most_negative, value);
                value = 0.0;
            }
        }
    }
    field.time = static_cast<double>(steps) * grid.dt;
    return field;
}

double fp_transition_prob(const DensityField& field, double x_star, Direction direction) {
    const GridSpec& g = field.grid;
    require(x_star >= g.x_min && x_star <= g.x_max, "x_star outside the grid");
    const double dx = g.dx();
    const double split = field.at(x_star);
    const double u = (x_star - g.x_min) / dx;
    const auto j = std::min(static_cast<std::size_t>(u), g.n_x - 2);
    const auto& v = field.values;

    double below = 0.0;
    for (std::size_t i = 0; i < j; ++i) below += 0.5 * dx * (v[i] + v[i + 1]);
    const double left_part = x_star - g.x(j);
    below += 0.5 * left_part * (v[j] + split);

    double above = 0.5 * (g.x(j + 1) - x_star) * (split + v[j + 1]);
    for (std::size_t i = j + 1; i + 1 < g.n_x; ++i) above += 0.5 * dx * (v[i] + v[i + 1]);

    return direction == Direction::HealthyToDistressed ? below : above;
}

void write_field_csv(const DensityField& field, std::ostream& out) {
    out << "x,density\n";
    out.precision(17);
    for (std::size_t i = 0; i < field.grid.n_x; ++i) {
        out << field.grid.x(i) << ',' << field.values[i] << '\n';
    }
}

}  // namespace regime::fp
