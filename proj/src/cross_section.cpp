#include "regime/cross_section.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include "regime/csv.hpp"
#include "regime/errors.hpp"

namespace regime::xs {

void UniverseSnapshot::validate() const {
    std::set<std::string> seen;
    for (const auto& e : entries) {
        require(seen.insert(e.name).second, "duplicate name '" + e.name + "' in universe");
        require(e.price > 0.0, "non-positive price for '" + e.name + "'");
        require(std::isfinite(e.score), "non-finite score for '" + e.name + "'");
    }
}

PortfolioSnapshot rank_deciles(const UniverseSnapshot& snapshot) {
    snapshot.validate();
    const std::size_t n = snapshot.entries.size();
    if (n < 10) {
        fail(ErrorKind::UniverseTooSmall,
             "decile ranking needs at least 10 names, got " + std::to_string(n));
    }
    std::vector<const UniverseEntry*> order;
    for (const auto& e : snapshot.entries) order.push_back(&e);
    std::sort(order.begin(), order.end(), [](const UniverseEntry* a, const UniverseEntry* b) {
        if (a->score != b->score) return a->score > b->score;
        return a->name < b->name;
    });

    const std::size_t k = std::max<std::size_t>(1, n / 10);
    const double w = 1.0 / (2.0 * static_cast<double>(k));
    PortfolioSnapshot out{.date = snapshot.date, .weights = {}, .gross = 0.0, .net = 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        double weight = 0.0;
        if (i < k) weight = w;
        else if (i >= n - k) weight = -w;
        out.weights[order[i]->name] = weight;
    }
    for (const auto& [name, weight] : out.weights) {
        out.gross += std::abs(weight);
        out.net += weight;
    }
    return out;
}

double portfolio_return(const Weights& weights, const std::map<std::string, double>& prev,
                        const std::map<std::string, double>& curr) {
    double r = 0.0;
    for (const auto& [name, w] : weights) {
        if (w == 0.0) continue;
        const auto p0 = prev.find(name);
        const auto p1 = curr.find(name);
        require(p0 != prev.end() && p1 != curr.end(), "missing price for held name '" + name + "'");
        r += w * (p1->second / p0->second - 1.0);
    }
    return r;
}

namespace {

struct Stats {
    double mean = 0.0;
    double stdev = 0.0;
};

Stats sample_stats(const std::vector<double>& v) {
    Stats s;
    if (v.empty()) return s;
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() < 2) return s;
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stdev = std::sqrt(ss / static_cast<double>(v.size() - 1));
    return s;
}

// Annualized realized volatility of daily log returns over [start, end].
std::optional<double> realized_vol(const PriceSeries& series, const Date& start, const Date& end) {
    std::vector<double> r;
    std::optional<double> prev;
    for (auto it = series.prices.lower_bound(start); it != series.prices.end() && it->first <= end;
         ++it) {
        if (prev) r.push_back(std::log(it->second / *prev));
        prev = it->second;
    }
    if (r.size() < 2) return std::nullopt;
    return sample_stats(r).stdev * std::sqrt(252.0);
}

}  // namespace

BacktestReport backtest(const std::vector<cds::SignalRecord>& signals,
                        const std::vector<PriceSeries>& prices, const Schedule& schedule) {
    require(schedule.rebalance_every >= 1, "rebalance interval must be >= 1");

    std::map<std::string, const PriceSeries*> by_name;
    std::set<Date> calendar_set;
    for (const auto& s : prices) {
        require(by_name.emplace(s.name, &s).second, "duplicate price series '" + s.name + "'");
        for (const auto& [d, p] : s.prices) {
            if (!(p > 0.0)) fail(ErrorKind::NonPositiveValue, s.name + ": non-positive price");
            calendar_set.insert(d);
        }
    }
    const std::vector<Date> calendar(calendar_set.begin(), calendar_set.end());

    // Signals per priced name, ordered by window end.
    std::map<std::string, std::vector<const cds::SignalRecord*>> sig;
    for (const auto& s : signals) {
        if (by_name.count(s.name)) sig[s.name].push_back(&s);
    }
    for (auto& [name, v] : sig) {
        std::stable_sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->window_end < b->window_end; });
    }
    if (!signals.empty()) {
        if (sig.empty()) fail(ErrorKind::NoOverlap, "no signal name has a price series");
        if (calendar.empty()) fail(ErrorKind::NoOverlap, "price series are empty");
        bool usable = false;
        for (const auto& [name, v] : sig) usable = usable || v.front()->window_end <= calendar.back();
        if (!usable) fail(ErrorKind::NoOverlap, "every signal postdates the price data");
    }
    if (!sig.empty() && sig.size() < 10) {
        fail(ErrorKind::UniverseTooSmall, "only " + std::to_string(sig.size()) +
                                              " names carry both prices and signals");
    }

    BacktestReport report;
    if (calendar.empty()) return report;

    std::size_t first = 0;
    if (schedule.first_rebalance) {
        first = static_cast<std::size_t>(
            std::lower_bound(calendar.begin(), calendar.end(), *schedule.first_rebalance) -
            calendar.begin());
    } else if (!sig.empty()) {
        Date earliest = calendar.back();
        for (const auto& [name, v] : sig) earliest = std::min(earliest, v.front()->window_end);
        first = static_cast<std::size_t>(
            std::lower_bound(calendar.begin(), calendar.end(), earliest) - calendar.begin());
    }
    if (first >= calendar.size()) fail(ErrorKind::NoOverlap, "first rebalance is after the price data");

    auto price_on = [&](const std::string& name, const Date& d) -> std::optional<double> {
        const auto& m = by_name.at(name)->prices;
        const auto it = m.find(d);
        if (it == m.end()) return std::nullopt;
        return it->second;
    };

    auto build_weights = [&](const Date& d) -> PortfolioSnapshot {
        UniverseSnapshot snap{.date = d, .entries = {}};
        for (const auto& [name, v] : sig) {
            const auto px = price_on(name, d);
            if (!px) continue;
            const cds::SignalRecord* latest = nullptr;
            for (const auto* s : v) {
                if (s->window_end <= d) latest = s;
                else break;
            }
            if (!latest) continue;
            double score = latest->nu_hat;
            if (schedule.key == RankingKey::MuTilde) {
                const auto vol = realized_vol(*by_name.at(name), latest->window_start, latest->window_end);
                if (!vol) continue;
                score *= *vol * *vol;
            }
            snap.entries.push_back({name, *px, score});
        }
        if (snap.entries.size() < 10) {
            ++report.flat_rebalances;
            PortfolioSnapshot flat{.date = d, .weights = {}, .gross = 0.0, .net = 0.0};
            for (const auto& e : snap.entries) flat.weights[e.name] = 0.0;
            return flat;
        }
        return rank_deciles(snap);
    };

    Weights held;
    double turnover_sum = 0.0;
    auto rebalance = [&](const Date& d) {
        PortfolioSnapshot snap = build_weights(d);
        double change = 0.0;
        std::set<std::string> names;
        for (const auto& [n, w] : held) names.insert(n);
        for (const auto& [n, w] : snap.weights) names.insert(n);
        for (const auto& n : names) {
            const double before = held.count(n) ? held.at(n) : 0.0;
            const double after = snap.weights.count(n) ? snap.weights.at(n) : 0.0;
            change += std::abs(after - before);
        }
        turnover_sum += 0.5 * change;
        held = snap.weights;
        report.rebalances.push_back(std::move(snap));
    };

    rebalance(calendar[first]);
    std::vector<double> portfolio, longs, shorts;
    for (std::size_t t = first + 1; t < calendar.size(); ++t) {
        const Date& d = calendar[t];
        const Date& prev = calendar[t - 1];
        double r = 0.0;
        double long_sum = 0.0, short_sum = 0.0;
        std::size_t n_long = 0, n_short = 0;
        for (auto& [name, w] : held) {
            if (w == 0.0) continue;
            const auto p0 = price_on(name, prev);
            const auto p1 = price_on(name, d);
            if (!p0 || !p1) {
                report.dropped.push_back({name, d});
                w = 0.0;
                continue;
            }
            const double ri = *p1 / *p0 - 1.0;
            r += w * ri;
            if (w > 0.0) {
                long_sum += ri;
                ++n_long;
            } else {
                short_sum += ri;
                ++n_short;
            }
        }
        DailyReturn day{.date = d, .portfolio = r, .long_leg = std::nullopt, .short_leg = std::nullopt};
        if (n_long) {
            day.long_leg = long_sum / static_cast<double>(n_long);
            longs.push_back(*day.long_leg);
        }
        if (n_short) {
            day.short_leg = short_sum / static_cast<double>(n_short);
            shorts.push_back(*day.short_leg);
        }
        portfolio.push_back(r);
        report.daily_returns.push_back(day);
        if ((t - first) % schedule.rebalance_every == 0) rebalance(d);
    }

    const Stats s = sample_stats(portfolio);
    report.n_days = portfolio.size();
    report.mean_return = s.mean;
    report.volatility = s.stdev;
    if (report.n_days >= 2 && s.stdev > 0.0) report.sharpe_annualized = s.mean / s.stdev * std::sqrt(252.0);
    report.turnover_avg = turnover_sum / static_cast<double>(report.rebalances.size());
    if (!longs.empty()) report.long_mean_return = sample_stats(longs).mean;
    if (!shorts.empty()) report.short_mean_return = sample_stats(shorts).mean;
    return report;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double signal_quality(const std::map<std::string, double>& true_nu,
                      const std::map<std::string, double>& extracted) {
    std::vector<double> a, b;
    for (const auto& [name, v] : true_nu) {
        const auto it = extracted.find(name);
        if (it == extracted.end()) continue;
        a.push_back(v);
        b.push_back(it->second);
    }
    if (a.size() < 3) {
        fail(ErrorKind::TooFewNames, "rank correlation needs at least 3 common names, got " +
                                         std::to_string(a.size()));
    }
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const Stats sa = sample_stats(ra);
    const Stats sb = sample_stats(rb);
    double cov = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) cov += (ra[i] - sa.mean) * (rb[i] - sb.mean);
    cov /= static_cast<double>(ra.size() - 1);
    return cov / (sa.stdev * sb.stdev);
}

std::map<std::string, double> mean_signal(const std::vector<cds::SignalRecord>& signals) {
    std::map<std::string, std::pair<double, std::size_t>> acc;
    for (const auto& s : signals) {
        auto& [sum, n] = acc[s.name];
        sum += s.nu_hat;
        ++n;
    }
    std::map<std::string, double> out;
    for (const auto& [name, v] : acc) out[name] = v.first / static_cast<double>(v.second);
    return out;
}

PriceSeries read_price_csv(const std::filesystem::path& path, const std::string& name) {
    const csv::Table t = csv::read(path);
    const auto c_date = t.column("date");
    const auto c_price = t.column("price");
    PriceSeries out{.name = name, .prices = {}};
    for (const auto& row : t.rows) {
        const Date d = parse_date(row[c_date]);
        const double p = csv::to_double(row[c_price], "price");
        if (!(p > 0.0)) fail(ErrorKind::NonPositiveValue, name + ": non-positive price on " + row[c_date]);
        if (!out.prices.emplace(d, p).second) {
            fail(ErrorKind::Validation, name + ": duplicate price date " + row[c_date]);
        }
    }
    return out;
}

void write_price_csv(const PriceSeries& series, std::ostream& out) {
    out << "date,price\n";
    for (const auto& [d, p] : series.prices) out << format_date(d) << ',' << csv::format_double(p) << '\n';
}

void write_weights_csv(const PortfolioSnapshot& snapshot, std::ostream& out) {
    out << "name,weight\n";
    for (const auto& [name, w] : snapshot.weights) out << name << ',' << csv::format_double(w) << '\n';
}

}  // namespace regime::xs
