#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "regime/cds_extract.hpp"
#include "regime/dates.hpp"

namespace regime::xs {

struct UniverseEntry {
    std::string name;
    double price;
    double score;  // ranking key: nu_hat, or nu_hat * sigma_hat^2
};

struct UniverseSnapshot {
    Date date;
    std::vector<UniverseEntry> entries;

    /// Throws Validation on duplicate names or non-positive prices.
    void validate() const;
};

using Weights = std::map<std::string, double>;

struct PortfolioSnapshot {
    Date date;
    Weights weights;  // every ranked name, zero for the middle of the book
    double gross = 0.0;
    double net = 0.0;
};

/// Long the top floor(N/10) names by score at +1/(2k) each, short the bottom k at
/// -1/(2k). Score ties are broken by ascending name, the earlier name ranking
/// higher. Throws UniverseTooSmall when N < 10.
PortfolioSnapshot rank_deciles(const UniverseSnapshot& snapshot);

/// sum_i w_i (curr_i / prev_i - 1) over names with nonzero weight. Every
/// weighted name must be present in both price maps.
double portfolio_return(const Weights& weights, const std::map<std::string, double>& prev,
                        const std::map<std::string, double>& curr);

struct PriceSeries {
    std::string name;
    std::map<Date, double> prices;
};

enum class RankingKey { NuHat, MuTilde };

struct Schedule {
    std::size_t rebalance_every = 21;    // trading days of the price calendar
    std::optional<Date> first_rebalance;  // default: first date with any signal
    RankingKey key = RankingKey::NuHat;
};

struct DailyReturn {
    Date date;
    double portfolio;
    std::optional<double> long_leg;   // equal-weight mean return of long names
    std::optional<double> short_leg;  // same for short names
};

struct DroppedPosition {
    std::string name;
    Date date;
};

struct BacktestReport {
    std::vector<DailyReturn> daily_returns;
    std::optional<double> sharpe_annualized;  // empty when volatility is zero
    double mean_return = 0.0;
    double volatility = 0.0;
    std::size_t n_days = 0;
    double turnover_avg = 0.0;
    std::optional<double> long_mean_return;
    std::optional<double> short_mean_return;
    std::vector<PortfolioSnapshot> rebalances;
    std::size_t flat_rebalances = 0;  // fewer than 10 names had a signal
    std::vector<DroppedPosition> dropped;
};

/// Walks the union calendar of all price dates. At every scheduled rebalance
/// date d the universe is every name priced on d whose latest signal has
/// window_end <= d; weights are set at the close of d and earn the next day's
/// returns. A held name without a price on some day is closed at its last
/// price and reported in `dropped`.
///
/// Throws UniverseTooSmall if between 1 and 9 names carry both prices and
/// signals, and NoOverlap if signals exist but none can ever be used.
BacktestReport backtest(const std::vector<cds::SignalRecord>& signals,
                        const std::vector<PriceSeries>& prices, const Schedule& schedule);

/// Spearman rank correlation over the names present in both maps (average
/// ranks for ties). Throws TooFewNames below 3 common names.
double signal_quality(const std::map<std::string, double>& true_nu,
                      const std::map<std::string, double>& extracted);

/// Mean nu_hat per name over all of its signal windows.
std::map<std::string, double> mean_signal(const std::vector<cds::SignalRecord>& signals);

/// Reads `date,price`.
PriceSeries read_price_csv(const std::filesystem::path& path, const std::string& name);
void write_price_csv(const PriceSeries& series, std::ostream& out);

/// Per-rebalance weight file: `name,weight`.
void write_weights_csv(const PortfolioSnapshot& snapshot, std::ostream& out);

}  // namespace regime::xs
