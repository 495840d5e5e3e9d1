#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "regime/model_core.hpp"

namespace regime::mc {

struct SimConfig {
    std::size_t n_paths = 1;
    double dt = 0.01;       // years
    double horizon = 1.0;   // years
    std::uint64_t seed = 0;
    double x0 = 0.0;
    bool store_paths = false;  // keep the full grid, not just X_T
    unsigned threads = 0;      // 0: hardware concurrency

    /// Throws Validation unless dt < horizon, n_paths >= 1 and horizon/dt is an
    /// integer to 1e-9 relative.
    void validate() const;
    std::size_t steps() const;
};

/// Simulated log-price paths. `terminal` always holds X_T per path; the full
/// grid is kept only when SimConfig::store_paths was set.
struct PathEnsemble {
    std::vector<double> times;
    std::vector<double> terminal;
    std::vector<double> grid;  // n_paths x times.size(), row-major; may be empty
    ModelParams params;
    std::uint64_t seed = 0;
    double x0 = 0.0;

    std::size_t n_paths() const noexcept { return terminal.size(); }
    bool has_paths() const noexcept { return !grid.empty(); }
    std::span<const double> path(std::size_t i) const;
};

struct MCEstimate {
    double value;
    double std_error;
    std::size_t n;
};

/// Euler-Maruyama: X_{k+1} = X_k + mu(X_k) dt + sigma sqrt(dt) Z_k, where Z_k is
/// Philox normal number k of stream `path index` under cfg.seed.
PathEnsemble simulate(const ModelParams& p, const SimConfig& cfg);

/// Fraction of paths whose X_T lies on the target side of x_star
/// (terminal-time classification).
MCEstimate mc_transition_prob(const ModelParams& p, const SimConfig& cfg,
                              Direction direction);

/// Transition probability at dt, 2dt, ..., 2^(levels-1) dt built from the same
/// Brownian increments: coarse steps sum consecutive fine increments.
/// Element 0 is the finest level.
std::vector<MCEstimate> mc_transition_prob_ladder(const ModelParams& p,
                                                  const SimConfig& cfg,
                                                  Direction direction, int levels);

struct BinSpec {
    double lo;
    double hi;
    std::size_t n;
    double width() const noexcept { return (hi - lo) / static_cast<double>(n); }
    double center(std::size_t i) const noexcept {
        return lo + (static_cast<double>(i) + 0.5) * width();
    }
};

struct Histogram {
    BinSpec bins;
    std::vector<double> density;  // count / (n_total * width)
    std::vector<std::size_t> counts;
    std::size_t outside = 0;      // samples falling outside [lo, hi)
    std::size_t n_total = 0;
};

/// Histogram of X_T normalized by the total sample count, so it integrates to
/// the in-range fraction (1 when the bins cover every sample).
Histogram mc_density_histogram(const PathEnsemble& ensemble, const BinSpec& bins);

/// CSV dump with header `path_id,step,x`. Writes the full grid when stored,
/// otherwise only the terminal step.
void write_ensemble_csv(const PathEnsemble& ensemble, std::ostream& out);

}  // namespace regime::mc
