#include "regime/mc_sim.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "oracles.hpp"
#include "regime/errors.hpp"

namespace {

using namespace regime;

constexpr auto kHD = Direction::HealthyToDistressed;
constexpr auto kDH = Direction::DistressedToHealthy;

mc::SimConfig config(std::size_t n, double dt, double horizon, double x0, std::uint64_t seed = 1) {
    mc::SimConfig c;
    c.n_paths = n;
    c.dt = dt;
    c.horizon = horizon;
    c.x0 = x0;
    c.seed = seed;
    return c;
}

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Wilson-Hilferty approximation to the chi-squared quantile.
double chi2_quantile(double df, double z) {
    const double a = 2.0 / (9.0 * df);
    return df * std::pow(1.0 - a + z * std::sqrt(a), 3);
}

TEST(SimConfig, Validation) {
    EXPECT_NO_THROW(config(1, 0.01, 1.0, 0.0).validate());
    EXPECT_THROW(config(0, 0.01, 1.0, 0.0).validate(), Error);
    EXPECT_THROW(config(10, 1.0, 1.0, 0.0).validate(), Error);
    EXPECT_THROW(config(10, 2.0, 1.0, 0.0).validate(), Error);
    EXPECT_THROW(config(10, 0.0, 1.0, 0.0).validate(), Error);
    EXPECT_THROW(config(10, 0.3, 1.0, 0.0).validate(), Error);
    EXPECT_THROW(config(10, 0.01, -1.0, 0.0).validate(), Error);
    EXPECT_EQ(config(10, 0.01, 1.0, 0.0).steps(), 100u);
    EXPECT_EQ(config(10, 1.0 / 252.0, 2.0, 0.0).steps(), 504u);
}

TEST(Simulate, NoiselessDriftlessPathsAreConstant) {
    auto c = config(50, 0.1, 2.0, 0.37);
    c.store_paths = true;
    const auto e = mc::simulate(ModelParams(0.0, 0.0, 0.0), c);
    ASSERT_TRUE(e.has_paths());
    for (std::size_t i = 0; i < e.n_paths(); ++i) {
        for (double x : e.path(i)) EXPECT_EQ(x, 0.37);
    }
}

TEST(Simulate, GridAndStartingPoint) {
    auto c = config(20, 0.25, 3.0, -1.2);
    c.store_paths = true;
    const auto e = mc::simulate(ModelParams(1.0, 0.3, 0.0), c);
    ASSERT_EQ(e.times.size(), 13u);
    EXPECT_EQ(e.times.front(), 0.0);
    EXPECT_DOUBLE_EQ(e.times.back(), 3.0);
    for (std::size_t k = 1; k < e.times.size(); ++k) EXPECT_NEAR(e.times[k] - e.times[k - 1], 0.25, 1e-14);
    for (std::size_t i = 0; i < e.n_paths(); ++i) {
        EXPECT_EQ(e.path(i).front(), -1.2);
        EXPECT_EQ(e.path(i).back(), e.terminal[i]);
    }
    EXPECT_EQ(e.seed, 1u);
    EXPECT_EQ(e.x0, -1.2);
}

TEST(Simulate, DriftlessMeanIsZero) {
    const std::size_t n = 1'000'000;
    const auto e = mc::simulate(ModelParams(0.0, 1.0, 0.0), config(n, 0.5, 1.0, 0.0, 9));
    EXPECT_NEAR(mean(e.terminal), 0.0, 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Simulate, EarlyDriftMatchesDriftAtStart) {
    const ModelParams p(1.0, 0.2, 0.0);
    const std::size_t n = 100'000;
    const double T = 0.1;
    const auto e = mc::simulate(p, config(n, 0.01, T, 2.0, 4));
    const double observed = (mean(e.terminal) - 2.0) / T;
    EXPECT_NEAR(drift(p, 2.0), 0.03856, 1e-5);
    const double se = p.sigma() / std::sqrt(T * static_cast<double>(n));
    EXPECT_NEAR(observed, drift(p, 2.0), 3.0 * se);
}

TEST(Simulate, DeterministicAcrossThreadCounts) {
    const ModelParams p(2.0, 0.5, 0.1);
    auto c = config(997, 0.02, 1.0, 0.3, 123);
    c.store_paths = true;
    c.threads = 1;
    const auto a = mc::simulate(p, c);
    c.threads = 3;
    const auto b = mc::simulate(p, c);
    c.threads = 0;
    const auto d = mc::simulate(p, c);
    EXPECT_EQ(a.grid, b.grid);
    EXPECT_EQ(a.grid, d.grid);
    EXPECT_EQ(a.terminal, b.terminal);
    c.store_paths = false;
    EXPECT_EQ(mc::simulate(p, c).terminal, a.terminal);
    c.seed = 124;
    EXPECT_NE(mc::simulate(p, c).terminal, a.terminal);
}

TEST(Simulate, PathsDoNotDependOnEnsembleSize) {
    const ModelParams p(1.0, 0.4, 0.0);
    const auto small = mc::simulate(p, config(10, 0.05, 1.0, 0.2, 77));
    const auto large = mc::simulate(p, config(100, 0.05, 1.0, 0.2, 77));
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(small.terminal[i], large.terminal[i]);
}

TEST(Simulate, StaysFiniteUnderStrongDrift) {
    const ModelParams p(10.0, 2.0, 0.0);
    const auto e = mc::simulate(p, config(2000, 0.01, 5.0, 0.0, 5));
    for (double x : e.terminal) {
        ASSERT_TRUE(std::isfinite(x));
        EXPECT_LT(std::abs(x), p.mu_tilde() * 5.0 + 10.0 * p.sigma() * std::sqrt(5.0));
    }
}

TEST(TransitionProb, StartAtThresholdIsOneHalf) {
    const ModelParams p(1.5, 0.4, 1.0);
    const auto c = config(100'000, 0.01, 1.0, 1.0, 21);
    for (auto dir : {kHD, kDH}) {
        const auto r = mc::mc_transition_prob(p, c, dir);
        EXPECT_NEAR(r.value, 0.5, 3.0 * r.std_error);
        EXPECT_EQ(r.n, 100'000u);
    }
}

TEST(TransitionProb, DriftlessMatchesNormalCdf) {
    const auto r = mc::mc_transition_prob(ModelParams(0.0, 1.0, 0.0), config(100'000, 0.5, 1.0, 1.0, 2), kHD);
    const double expected = oracle::normal_cdf(-1.0);
    EXPECT_NEAR(expected, 0.158655, 1e-6);
    EXPECT_NEAR(r.std_error, std::sqrt(r.value * (1.0 - r.value) / 1e5), 1e-15);
    EXPECT_NEAR(r.value, expected, 3.0 * r.std_error);
}

TEST(TransitionProb, MatchesQuadratureOnModerateHorizon) {
    const ModelParams p = ModelParams::from_threshold_price(1.0, 0.2, 100.0);
    const double x0 = std::log(150.0);
    const auto r = mc::mc_transition_prob(p, config(20'000, 0.05, 25.0, x0, 8), kHD);
    const double q = regime_transition_prob_finite(p, x0, 25.0, kHD).value;
    EXPECT_NEAR(r.value, q, 3.0 * r.std_error + 0.005);
}

TEST(TransitionProb, LongHorizonApproachesAsymptoticLimit) {
    const ModelParams p = ModelParams::from_threshold_price(1.0, 0.2, 100.0);
    const double x0 = std::log(150.0);
    const auto r = mc::mc_transition_prob(p, config(10'000, 0.05, 400.0, x0, 12), kHD);
    const double q = regime_transition_prob_finite(p, x0, 400.0, kHD).value;
    EXPECT_NEAR(q, 0.3077, 1e-4);
    EXPECT_NEAR(r.value, q, 3.0 * r.std_error + 0.005);
}

TEST(TransitionProb, DistressedToHealthyMatchesMixtureOracle) {
    const ModelParams p(0.5, 0.5, 0.0);
    const auto r = mc::mc_transition_prob(p, config(100'000, 0.01, 1.0, -0.3, 13), kDH);
    const double expected = 1.0 - oracle::mixture_prob_below(0.5, 0.5, 0.0, -0.3, 1.0);
    EXPECT_NEAR(r.value, expected, 3.0 * r.std_error + 0.002);
}

TEST(TransitionProb, RejectsWrongSide) {
    const ModelParams p(1.0, 0.2, 0.0);
    EXPECT_THROW(mc::mc_transition_prob(p, config(10, 0.1, 1.0, -0.1), kHD), Error);
    EXPECT_THROW(mc::mc_transition_prob(p, config(10, 0.1, 1.0, 0.1), kDH), Error);
    EXPECT_THROW(mc::mc_transition_prob(p, config(10, 0.3, 1.0, 0.1), kHD), Error);
}

TEST(Ladder, FinestLevelEqualsPlainEstimate) {
    const ModelParams p(2.0, 1.0, 0.0);
    const auto c = config(5000, 0.01, 1.0, 0.3, 31);
    const auto ladder = mc::mc_transition_prob_ladder(p, c, kHD, 3);
    ASSERT_EQ(ladder.size(), 3u);
    EXPECT_EQ(ladder[0].value, mc::mc_transition_prob(p, c, kHD).value);
    EXPECT_THROW(mc::mc_transition_prob_ladder(p, config(10, 0.01, 0.03, 0.3), kHD, 3), Error);
}

TEST(Ladder, WeakErrorShrinksAsStepHalves) {
    const ModelParams p(2.0, 1.0, 0.0);
    const double x0 = 0.3;
    const double q = regime_transition_prob_finite(p, x0, 1.0, kHD).value;
    const auto ladder = mc::mc_transition_prob_ladder(p, config(100'000, 0.01, 1.0, x0, 3), kHD, 3);
    const double g01 = std::abs(ladder[0].value - q);
    const double g02 = std::abs(ladder[1].value - q);
    const double g04 = std::abs(ladder[2].value - q);
    EXPECT_LT(g01, g02);
    EXPECT_LT(g02, g04);
    // order one: successive differences of the coupled estimates halve
    const double ratio = (ladder[2].value - ladder[1].value) / (ladder[1].value - ladder[0].value);
    EXPECT_GT(ratio, 1.3);
    EXPECT_LT(ratio, 3.0);
}

TEST(Histogram, SinglePathOneBin) {
    const auto e = mc::simulate(ModelParams(1.0, 0.2, 0.0), config(1, 0.1, 1.0, 0.0));
    const auto h = mc::mc_density_histogram(e, {-10.0, 10.0, 1});
    ASSERT_EQ(h.density.size(), 1u);
    EXPECT_DOUBLE_EQ(h.density[0], 1.0 / 20.0);
    EXPECT_EQ(h.outside, 0u);
}

TEST(Histogram, RejectsDegenerateBins) {
    const auto e = mc::simulate(ModelParams(1.0, 0.2, 0.0), config(3, 0.1, 1.0, 0.0));
    EXPECT_THROW(mc::mc_density_histogram(e, {1.0, 1.0, 5}), Error);
    EXPECT_THROW(mc::mc_density_histogram(e, {1.0, 0.0, 5}), Error);
    EXPECT_THROW(mc::mc_density_histogram(e, {0.0, 1.0, 0}), Error);
    EXPECT_THROW(mc::mc_density_histogram(mc::PathEnsemble{{}, {}, {}, ModelParams(1.0, 0.2, 0.0)}, {0.0, 1.0, 1}),
                 Error);
}

TEST(Histogram, DriftlessMatchesGaussian) {
    const auto e = mc::simulate(ModelParams(0.0, 1.0, 0.0), config(1'000'000, 0.5, 1.0, 0.0, 6));
    const auto h = mc::mc_density_histogram(e, {-5.0, 5.0, 100});
    double area = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
        worst = std::max(worst, std::abs(h.density[i] - oracle::gaussian_pdf(h.bins.center(i), 0.0, 1.0)));
        area += h.density[i] * h.bins.width();
    }
    EXPECT_LT(worst, 0.01);
    EXPECT_NEAR(area, 1.0 - static_cast<double>(h.outside) / 1e6, 1e-12);
}

TEST(Histogram, ChiSquaredAgainstExactDensity) {
    const ModelParams p(1.0, 0.5, 0.0);
    const double x0 = 0.3, T = 1.0;
    const std::size_t n = 100'000;
    const auto e = mc::simulate(p, config(n, 0.005, T, x0, 44));
    const mc::BinSpec bins{-1.0, 1.8, 28};
    const auto h = mc::mc_density_histogram(e, bins);
    double chi2 = 0.0, covered = 0.0;
    for (std::size_t i = 0; i < bins.n; ++i) {
        const double lo = bins.lo + static_cast<double>(i) * bins.width();
        const double prob =
            quad::integrate([&](double x) { return transition_density(p, {x, x0, T}); }, lo, lo + bins.width()).value;
        covered += prob;
        const double expected = prob * static_cast<double>(n);
        ASSERT_GT(expected, 5.0);
        const double diff = static_cast<double>(h.counts[i]) - expected;
        chi2 += diff * diff / expected;
    }
    const double expected_out = (1.0 - covered) * static_cast<double>(n);
    ASSERT_GT(expected_out, 5.0);
    const double diff = static_cast<double>(h.outside) - expected_out;
    chi2 += diff * diff / expected_out;
    EXPECT_LT(chi2, chi2_quantile(static_cast<double>(bins.n), 3.090232));
}

TEST(EnsembleCsv, TerminalOnlyAndFullGrid) {
    const ModelParams p(1.0, 0.2, 0.0);
    auto c = config(3, 0.5, 1.0, 0.0);
    std::ostringstream terminal;
    mc::write_ensemble_csv(mc::simulate(p, c), terminal);
    c.store_paths = true;
    std::ostringstream full;
    mc::write_ensemble_csv(mc::simulate(p, c), full);
    const auto lines = [](const std::string& s) { return std::count(s.begin(), s.end(), '\n'); };
    EXPECT_EQ(terminal.str().rfind("path_id,step,x\n", 0), 0u);
    EXPECT_EQ(lines(terminal.str()), 1 + 3);
    EXPECT_EQ(lines(full.str()), 1 + 3 * 3);
    EXPECT_NE(full.str().find("\n0,0,0\n"), std::string::npos);
}

}  // namespace
