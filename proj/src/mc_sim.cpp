#include "regime/mc_sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <thread>

#include "regime/errors.hpp"
#include "regime/philox.hpp"

namespace regime::mc {

void SimConfig::validate() const {
    require(n_paths >= 1, "n_paths must be >= 1");
    require(std::isfinite(dt) && dt > 0.0, "dt must be > 0");
    require(std::isfinite(horizon) && horizon > 0.0, "horizon must be > 0");
    require(dt < horizon, "dt must be smaller than the horizon");
    require(std::isfinite(x0), "x0 must be finite");
    const double ratio = horizon / dt;
    require(std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio,
            "horizon must be an integer multiple of dt");
}

std::size_t SimConfig::steps() const {
    return static_cast<std::size_t>(std::llround(horizon / dt));
}

std::span<const double> PathEnsemble::path(std::size_t i) const {
    require(has_paths(), "ensemble was simulated without stored paths");
    require(i < n_paths(), "path index out of range");
    return std::span<const double>(grid).subspan(i * times.size(), times.size());
}

namespace {

unsigned worker_count(unsigned requested, std::size_t n_paths) {
    unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(n, n_paths));
}

// Runs body(begin, end) over contiguous path ranges. Each path's output
// depends only on its own index, so the partition never changes results.
template <typename Body>
void for_paths(std::size_t n_paths, unsigned threads, Body body) {
    const unsigned workers = worker_count(threads, n_paths);
    if (workers <= 1) {
        body(std::size_t{0}, n_paths);
        return;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n_paths + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n_paths, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([=] { body(begin, end); });
    }
}

// One path; `record` (if not null) receives all steps + 1 values.
double run_path(const ModelParams& p, const SimConfig& cfg, std::size_t steps,
                std::uint64_t path_id, double* record) {
    const double noise = p.sigma() * std::sqrt(cfg.dt);
    double x = cfg.x0;
    if (record) record[0] = x;
    for (std::size_t block = 0; 2 * block < steps; ++block) {
        const auto [z0, z1] = rng::normal_pair(cfg.seed, path_id, block);
        const std::size_t k = 2 * block;
        x += drift(p, x) * cfg.dt + noise * z0;
        if (record) record[k + 1] = x;
        if (k + 1 < steps) {
            x += drift(p, x) * cfg.dt + noise * z1;
            if (record) record[k + 2] = x;
        }
    }
    return x;
}

bool on_target_side(const ModelParams& p, double x, Direction direction) {
    return direction == Direction::HealthyToDistressed ? x <= p.x_star() : x >= p.x_star();
}

void require_start_side(const ModelParams& p, double x0, Direction direction) {
    if (direction == Direction::HealthyToDistressed) {
        require(x0 >= p.x_star(), "healthy-to-distressed requires x0 >= x_star");
    } else {
        require(x0 <= p.x_star(), "distressed-to-healthy requires x0 <= x_star");
    }
}

MCEstimate bernoulli_estimate(std::size_t hits, std::size_t n) {
    const double phat = static_cast<double>(hits) / static_cast<double>(n);
    return {phat, std::sqrt(phat * (1.0 - phat) / static_cast<double>(n)), n};
}

}  // namespace

PathEnsemble simulate(const ModelParams& p, const SimConfig& cfg) {
    cfg.validate();
    const std::size_t steps = cfg.steps();
    PathEnsemble out{.times = {}, .terminal = {}, .grid = {}, .params = p,
                     .seed = cfg.seed, .x0 = cfg.x0};
    out.times.resize(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) out.times[k] = static_cast<double>(k) * cfg.dt;
    out.terminal.resize(cfg.n_paths);
    if (cfg.store_paths) out.grid.resize(cfg.n_paths * (steps + 1));

    for_paths(cfg.n_paths, cfg.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            double* record = cfg.store_paths ? out.grid.data() + i * (steps + 1) : nullptr;
            out.terminal[i] = run_path(p, cfg, steps, i, record);
        }
    });
    for (double x : out.terminal) {
        if (!std::isfinite(x)) fail(ErrorKind::Validation, "non-finite value in simulated path");
    }
    return out;
}

MCEstimate mc_transition_prob(const ModelParams& p, const SimConfig& cfg,
                              Direction direction) {
    cfg.validate();
    require_start_side(p, cfg.x0, direction);
    const std::size_t steps = cfg.steps();
    std::vector<unsigned char> hit(cfg.n_paths, 0);
    for_paths(cfg.n_paths, cfg.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            hit[i] = on_target_side(p, run_path(p, cfg, steps, i, nullptr), direction);
        }
    });
    const auto hits = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
    return bernoulli_estimate(hits, cfg.n_paths);
}

std::vector<MCEstimate> mc_transition_prob_ladder(const ModelParams& p,
                                                  const SimConfig& cfg,
                                                  Direction direction, int levels) {
    cfg.validate();
    require(levels >= 1 && levels <= 16, "levels must be in [1, 16]");
    require_start_side(p, cfg.x0, direction);
    const std::size_t fine_steps = cfg.steps();
    const std::size_t coarsest = std::size_t{1} << (levels - 1);
    require(fine_steps % coarsest == 0, "fine step count must divide by 2^(levels-1)");

    std::vector<unsigned char> hit(cfg.n_paths * static_cast<std::size_t>(levels), 0);
    for_paths(cfg.n_paths, cfg.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> x(static_cast<std::size_t>(levels));
        std::vector<double> acc(static_cast<std::size_t>(levels));
        for (std::size_t i = begin; i < end; ++i) {
            std::fill(x.begin(), x.end(), cfg.x0);
            std::fill(acc.begin(), acc.end(), 0.0);
            for (std::size_t k = 0; k < fine_steps; ++k) {
                const double dw = std::sqrt(cfg.dt) * rng::normal_at(cfg.seed, i, k);
                for (int l = 0; l < levels; ++l) {
                    acc[l] += dw;
                    const std::size_t stride = std::size_t{1} << l;
                    if ((k + 1) % stride == 0) {
                        const double h = cfg.dt * static_cast<double>(stride);
                        x[l] += drift(p, x[l]) * h + p.sigma() * acc[l];
                        acc[l] = 0.0;
                    }
                }
            }
            for (int l = 0; l < levels; ++l) {
                hit[i * levels + l] = on_target_side(p, x[l], direction);
            }
        }
    });
    std::vector<MCEstimate> out;
    for (int l = 0; l < levels; ++l) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < cfg.n_paths; ++i) hits += hit[i * levels + l];
        out.push_back(bernoulli_estimate(hits, cfg.n_paths));
    }
    return out;
}

Histogram mc_density_histogram(const PathEnsemble& ensemble, const BinSpec& bins) {
    require(ensemble.n_paths() >= 1, "histogram of an empty ensemble");
    require(bins.n >= 1 && std::isfinite(bins.lo) && std::isfinite(bins.hi) && bins.hi > bins.lo,
            "histogram bins must have positive width");
    Histogram h{.bins = bins, .density = std::vector<double>(bins.n, 0.0),
                .counts = std::vector<std::size_t>(bins.n, 0), .outside = 0,
                .n_total = ensemble.n_paths()};
    const double width = bins.width();
    for (double x : ensemble.terminal) {
        if (x < bins.lo || x > bins.hi) {
            ++h.outside;
            continue;
        }
        auto idx = static_cast<std::size_t>((x - bins.lo) / width);
        h.counts[std::min(idx, bins.n - 1)] += 1;
    }
    const double norm = 1.0 / (static_cast<double>(h.n_total) * width);
    for (std::size_t i = 0; i < bins.n; ++i) {
        h.density[i] = static_cast<double>(h.counts[i]) * norm;
    }
    return h;
}

void write_ensemble_csv(const PathEnsemble& ensemble, std::ostream& out) {
    out << "path_id,step,x\n";
    out.precision(17);
    const std::size_t last = ensemble.times.size() - 1;
    for (std::size_t i = 0; i < ensemble.n_paths(); ++i) {
        if (ensemble.has_paths()) {
            const auto path = ensemble.path(i);
            for (std::size_t k = 0; k < path.size(); ++k) {
                out << i << ',' << k << ',' << path[k] << '\n';
            }
        } else {
            out << i << ',' << last << ',' << ensemble.terminal[i] << '\n';
        }
    }
}

}  // namespace regime::mc
