#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace regime::quad {

struct Options {
    double abs_tol = 1e-10;   // target for the summed error estimate
    double rel_tol = 1e-13;   // per-segment refinement target, relative to its L1 norm
    unsigned max_depth = 20;  // bisection depth limit per segment
};

struct Result {
    double value = 0.0;
    double abs_error = 0.0;  // summed Kronrod-Gauss error estimates
    std::size_t evaluations = 0;
    bool converged = false;  // abs_error <= abs_tol
};

/// Adaptive 7/15-point Gauss-Kronrod integration (Boost.Math) of f over
/// [points.front(), points.back()]. Interior entries of `points` are forced
/// breakpoints (peaks, kinks); they must be non-decreasing.
Result integrate(const std::function<double(double)>& f,
                 std::span<const double> points, const Options& opts = {});

Result integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& opts = {});

}  // namespace regime::quad
