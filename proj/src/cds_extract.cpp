#include "regime/cds_extract.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "regime/csv.hpp"
#include "regime/errors.hpp"

namespace regime::cds {

void SpreadSeries::validate() const {
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const auto& o = observations[i];
        if (!(o.price > 0.0) || !(o.spread > 0.0) || !std::isfinite(o.price) ||
            !std::isfinite(o.spread)) {
            fail(ErrorKind::NonPositiveValue,
                 name + ": non-positive price or spread on " + format_date(o.date));
        }
        if (i > 0 && !(observations[i - 1].date < o.date)) {
            fail(ErrorKind::Validation,
                 name + ": dates not strictly increasing at " + format_date(o.date));
        }
    }
}

SpreadModelConfig::SpreadModelConfig(double recovery_rate, double maturity)
    : recovery_(recovery_rate), maturity_(maturity) {
    require(recovery_rate >= 0.0 && recovery_rate <= 1.0, "recovery rate must be in [0, 1]");
    require(std::isfinite(maturity) && maturity > 0.0, "maturity must be > 0");
}

double synth_spread(const ModelParams& p, const SpreadModelConfig& cfg, double s0) {
    require(s0 > p.s_star(), "synthetic spreads need a healthy price s0 > s_star");
    const auto prob = default_prob_asymptotic(p, s0, Direction::HealthyToDistressed);
    return cfg.normalization() * prob.value;
}

SignalRecord extract_nu(const SpreadSeries& series, const DateRange& window) {
    std::vector<const SpreadObservation*> obs;
    for (const auto& o : series.observations) {
        if (o.date >= window.start && o.date <= window.end) obs.push_back(&o);
    }
    for (const auto* o : obs) {
        if (!(o->price > 0.0) || !(o->spread > 0.0)) {
            fail(ErrorKind::NonPositiveValue,
                 series.name + ": non-positive price or spread on " + format_date(o->date));
        }
    }
    const std::size_t n = obs.size();
    if (n < kMinWindow) {
        fail(ErrorKind::InsufficientData, series.name + ": " + std::to_string(n) +
                                              " observations in window, need " +
                                              std::to_string(kMinWindow));
    }

    const double reference = obs.front()->spread;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::log(obs[i]->price);
        y[i] = std::log(obs[i]->spread / reference);
    }
    const double nd = static_cast<double>(n);
    double x_mean = 0.0, y_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x_mean += x[i];
        y_mean += y[i];
    }
    x_mean /= nd;
    y_mean /= nd;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - x_mean;
        const double dy = y[i] - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (std::sqrt(sxx / (nd - 1.0)) < 1e-10) {
        fail(ErrorKind::DegeneratePrices, series.name + ": log prices have no variation in window");
    }
    const double slope = sxy / sxx;
    const double intercept = y_mean - slope * x_mean;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - intercept - slope * x[i];
        ssr += r * r;
    }
    double r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
    r2 = std::clamp(r2, 0.0, 1.0);

    return SignalRecord{
        .name = series.name,
        .window_start = window.start,
        .window_end = window.end,
        .nu_hat = -0.5 * slope,
        .a_tilde = intercept + std::log(reference),
        .r_squared = r2,
        .n_obs = n,
        .slope_std_error = std::sqrt(ssr / (nd - 2.0) / sxx),
    };
}

std::vector<SignalRecord> rolling_extract(const SpreadSeries& series, std::size_t window_len,
                                          std::size_t stride,
                                          std::vector<SkippedWindow>* skipped) {
    require(window_len >= 1 && stride >= 1, "window length and stride must be >= 1");
    std::vector<SignalRecord> out;
    if (!series.observations.empty()) {
        const std::int64_t first = business_index(series.observations.front().date);
        const std::int64_t last = business_index(series.observations.back().date);
        const auto len = static_cast<std::int64_t>(window_len);
        for (std::int64_t start = first; start + len - 1 <= last;
             start += static_cast<std::int64_t>(stride)) {
            const DateRange window{from_business_index(start), from_business_index(start + len - 1)};
            try {
                out.push_back(extract_nu(series, window));
            } catch (const Error& e) {
                if (skipped) skipped->push_back({window, e.what()});
            }
        }
    }
    if (out.empty()) fail(ErrorKind::EmptyResult, series.name + ": no window produced a signal");
    return out;
}

double implied_threshold_price(const SignalRecord& signal, const SpreadModelConfig& cfg) {
    require(signal.nu_hat != 0.0, "implied threshold needs nu_hat != 0");
    require(cfg.normalization() > 0.0, "implied threshold needs recovery < 1");
    return std::exp((signal.a_tilde - std::log(cfg.normalization())) / (2.0 * signal.nu_hat));
}

SpreadSeries read_spread_csv(const std::filesystem::path& path, const std::string& name) {
    const csv::Table t = csv::read(path);
    const auto c_date = t.column("date");
    const auto c_price = t.column("price");
    const auto c_spread = t.column("spread_bps");
    SpreadSeries series{.name = name, .observations = {}};
    for (const auto& row : t.rows) {
        series.observations.push_back({parse_date(row[c_date]),
                                       csv::to_double(row[c_price], "price"),
                                       csv::to_double(row[c_spread], "spread_bps")});
    }
    series.validate();
    return series;
}

void write_spread_csv(const SpreadSeries& series, std::ostream& out) {
    out << "date,price,spread_bps\n";
    for (const auto& o : series.observations) {
        out << format_date(o.date) << ',' << csv::format_double(o.price) << ','
            << csv::format_double(o.spread) << '\n';
    }
}

void write_signals_csv(const std::vector<SignalRecord>& signals, std::ostream& out) {
    out << "name,window_start,window_end,nu_hat,a_tilde,r_squared,n_obs\n";
    for (const auto& s : signals) {
        out << s.name << ',' << format_date(s.window_start) << ',' << format_date(s.window_end)
            << ',' << csv::format_double(s.nu_hat) << ',' << csv::format_double(s.a_tilde) << ','
            << csv::format_double(s.r_squared) << ',' << s.n_obs << '\n';
    }
}

std::vector<SignalRecord> read_signals_csv(const std::filesystem::path& path) {
    const csv::Table t = csv::read(path);
    const auto c_name = t.column("name");
    const auto c_start = t.column("window_start");
    const auto c_end = t.column("window_end");
    const auto c_nu = t.column("nu_hat");
    const auto c_a = t.column("a_tilde");
    const auto c_r2 = t.column("r_squared");
    const auto c_n = t.column("n_obs");
    std::vector<SignalRecord> out;
    for (const auto& row : t.rows) {
        const long long n_obs = csv::to_integer(row[c_n], "n_obs");
        if (n_obs < 0) fail(ErrorKind::Parse, "negative n_obs in " + path.string());
        out.push_back({.name = row[c_name],
                       .window_start = parse_date(row[c_start]),
                       .window_end = parse_date(row[c_end]),
                       .nu_hat = csv::to_double(row[c_nu], "nu_hat"),
                       .a_tilde = csv::to_double(row[c_a], "a_tilde"),
                       .r_squared = csv::to_double(row[c_r2], "r_squared"),
                       .n_obs = static_cast<std::size_t>(n_obs),
                       .slope_std_error = std::nan("")});
    }
    return out;
}

}  // namespace regime::cds
