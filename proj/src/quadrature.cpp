#include "regime/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>

#include "regime/errors.hpp"

namespace regime::quad {

Result integrate(const std::function<double(double)>& f,
                 std::span<const double> points, const Options& opts) {
    require(points.size() >= 2, "quadrature needs at least two points");
    require(opts.abs_tol > 0.0 && opts.max_depth >= 1, "quadrature needs abs_tol > 0 and max_depth >= 1");
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        require(points[i] <= points[i + 1], "quadrature breakpoints must be sorted");
    }

    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    Result out;
    auto counted = [&](double x) {
        ++out.evaluations;
        return f(x);
    };
    std::size_t segments = 0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) segments += points[i] < points[i + 1];
    const double share = opts.abs_tol / static_cast<double>(std::max<std::size_t>(segments, 1));
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        if (points[i] == points[i + 1]) continue;
        // A single-panel pass gives the segment's L1 norm, which turns the
        // absolute error share into Boost's relative tolerance.
        double error = 0.0, l1 = 0.0;
        const double coarse = GK::integrate(counted, points[i], points[i + 1], 0, 0.0, &error, &l1);
        if (error <= 0.1 * share) {
            out.value += coarse;
            out.abs_error += error;
            continue;
        }
        const double tol = std::max(opts.rel_tol, 0.1 * share / l1);
        out.value += GK::integrate(counted, points[i], points[i + 1], opts.max_depth, tol, &error);
        out.abs_error += error;
    }
    out.converged = std::isfinite(out.value) && out.abs_error <= opts.abs_tol;
    return out;
}

Result integrate(const std::function<double(double)>& f, double a, double b, const Options& opts) {
    const double pts[2] = {a, b};
    return integrate(f, std::span<const double>(pts, 2), opts);
}

}  // namespace regime::quad
