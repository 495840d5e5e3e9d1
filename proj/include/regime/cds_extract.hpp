#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "regime/dates.hpp"
#include "regime/model_core.hpp"

namespace regime::cds {

/// Fewest observations a regression window may use.
inline constexpr std::size_t kMinWindow = 15;

struct SpreadObservation {
    Date date;
    double price;   // stock price S > 0
    double spread;  // CDS spread Z in basis points > 0
};

struct SpreadSeries {
    std::string name;
    std::vector<SpreadObservation> observations;

    /// Throws Validation on non-increasing dates and NonPositiveValue on a
    /// price or spread <= 0.
    void validate() const;
};

struct SignalRecord {
    std::string name;
    Date window_start;
    Date window_end;
    double nu_hat;
    double a_tilde;
    double r_squared;
    std::size_t n_obs;
    double slope_std_error;
};

/// Linear CDS pricing relation Z = b P with b = 1e4 (1 - R) / T.
class SpreadModelConfig {
public:
    SpreadModelConfig(double recovery_rate, double maturity);

    double recovery_rate() const noexcept { return recovery_; }
    double maturity() const noexcept { return maturity_; }
    double normalization() const noexcept { return 1e4 * (1.0 - recovery_) / maturity_; }

private:
    double recovery_;
    double maturity_;
};

/// Spread in bps implied by the asymptotic default probability at price s0.
/// Only the healthy regime s0 > s_star is accepted.
double synth_spread(const ModelParams& p, const SpreadModelConfig& cfg, double s0);

struct DateRange {
    Date start;
    Date end;  // inclusive
};

/// OLS of ln Z on ln S with intercept over observations dated inside
/// `window`; nu_hat = -slope / 2, a_tilde = intercept.
///
/// Log spreads enter relative to the first spread of the window, so a
/// rescaling of all spreads by a power of two leaves the slope bit-identical.
SignalRecord extract_nu(const SpreadSeries& series, const DateRange& window);

struct SkippedWindow {
    DateRange window;
    std::string reason;
};

/// Sliding windows of `window_len` weekdays advanced by `stride` weekdays,
/// anchored at the first observation. Windows that fail extraction are dropped
/// and reported through `skipped`. Throws EmptyResult if no window succeeds.
std::vector<SignalRecord> rolling_extract(const SpreadSeries& series, std::size_t window_len,
                                          std::size_t stride,
                                          std::vector<SkippedWindow>* skipped = nullptr);

/// S_star implied by an intercept once (R, T) fix the normalization:
/// exp((a_tilde - ln b) / (2 nu_hat)).
double implied_threshold_price(const SignalRecord& signal, const SpreadModelConfig& cfg);

/// Reads `date,price,spread_bps`.
SpreadSeries read_spread_csv(const std::filesystem::path& path, const std::string& name);
void write_spread_csv(const SpreadSeries& series, std::ostream& out);

/// Signal CSV: `name,window_start,window_end,nu_hat,a_tilde,r_squared,n_obs`.
void write_signals_csv(const std::vector<SignalRecord>& signals, std::ostream& out);
std::vector<SignalRecord> read_signals_csv(const std::filesystem::path& path);

}  // namespace regime::cds
