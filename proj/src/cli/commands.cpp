#include "regime/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "regime/cds_extract.hpp"
#include "regime/cross_section.hpp"
#include "regime/csv.hpp"
#include "regime/fp_oracle.hpp"
#include "regime/mc_sim.hpp"
#include "regime/model_core.hpp"
#include "regime/philox.hpp"

namespace regime::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Validation: return kExitValidation;
        case ErrorKind::EmptyResult: return kExitEmptyResult;
        case ErrorKind::UniverseTooSmall: return kExitUniverseTooSmall;
        case ErrorKind::InsufficientData:
        case ErrorKind::DegeneratePrices:
        case ErrorKind::NonPositiveValue:
        case ErrorKind::NoOverlap:
        case ErrorKind::TooFewNames:
        case ErrorKind::Io:
        case ErrorKind::Parse: return kExitData;
    }
    return kExitInternal;
}

namespace {

// Stands in for a tolerance failure; carries the summary already printed.
struct ToleranceFailure {
    std::string what;
};

const std::vector<std::string> kPathKeys = {"out", "out_dir", "manifest", "signals", "truth"};

json absolutize_paths(json cfg) {
    for (const auto& key : kPathKeys) {
        if (cfg.contains(key) && cfg[key].is_string()) {
            cfg[key] = fs::absolute(fs::path(cfg[key].get<std::string>())).lexically_normal().string();
        }
    }
    return cfg;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
    return out;
}

void write_json(const fs::path& path, const json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

// Resolved config sits next to a file output as <file>.config.json.
void write_config_beside(const fs::path& output, const json& cfg) {
    write_json(fs::path(output.string() + ".config.json"), cfg);
}

double num(const json& cfg, const char* key) { return cfg.at(key).get<double>(); }
long long integer(const json& cfg, const char* key) { return cfg.at(key).get<long long>(); }
std::string str(const json& cfg, const char* key) { return cfg.at(key).get<std::string>(); }

std::size_t count(const json& cfg, const char* key, long long min_value) {
    const long long v = integer(cfg, key);
    require(v >= min_value, std::string(key) + " must be >= " + std::to_string(min_value));
    return static_cast<std::size_t>(v);
}

std::uint64_t seed_of(const json& cfg) {
    const long long v = integer(cfg, "seed");
    require(v >= 0, "seed must be >= 0");
    return static_cast<std::uint64_t>(v);
}

ModelParams model_of(const json& cfg) {
    return ModelParams(num(cfg, "nu"), num(cfg, "sigma"), num(cfg, "x_star"));
}

std::string fmt(double v) { return csv::format_double(v); }

// ---------------------------------------------------------------- density

void cmd_density(const json& cfg, std::ostream& out) {
    const ModelParams p = model_of(cfg);
    const double x0 = num(cfg, "x0");
    const double t = num(cfg, "t");
    require(t > 0.0, "t must be > 0");
    require(p.sigma() > 0.0, "sigma must be > 0");
    const std::size_t n = count(cfg, "n_points", 2);
    const double reach = 5.0 * p.sigma() * std::sqrt(t) + p.mu_tilde() * t;
    const double x_min = cfg["x_min"].is_null() ? x0 - reach : num(cfg, "x_min");
    const double x_max = cfg["x_max"].is_null() ? x0 + reach : num(cfg, "x_max");
    require(x_min < x_max, "x_min must be < x_max");
    const double h = (x_max - x_min) / static_cast<double>(n - 1);

    std::vector<double> xs(n), closed(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = x_min + static_cast<double>(i) * h;
        closed[i] = transition_density(p, {xs[i], x0, t});
    }

    const bool with_fp = cfg.at("compare_fp").get<bool>();
    const bool with_mc = cfg.at("compare_mc").get<bool>();
    std::vector<double> fp_col, mc_col;
    double fp_max = 0.0, mc_z = 0.0;
    if (with_fp) {
        const double margin = 1.2 * reach + 10.0 * num(cfg, "fp_dx");
        const auto grid = fp::GridSpec::with_spacing(std::min(x_min, x0 - margin),
                                                     std::max(x_max, x0 + margin),
                                                     num(cfg, "fp_dx"), num(cfg, "fp_dt"));
        const auto field = fp::solve_fp(p, x0, t, grid);
        for (std::size_t i = 0; i < n; ++i) {
            fp_col.push_back(field.at(xs[i]));
            fp_max = std::max(fp_max, std::abs(fp_col[i] - closed[i]));
        }
    }
    if (with_mc) {
        mc::SimConfig sc{.n_paths = count(cfg, "mc_paths", 1), .dt = num(cfg, "mc_dt"),
                         .horizon = t, .seed = seed_of(cfg), .x0 = x0};
        const auto ens = mc::simulate(p, sc);
        const mc::BinSpec bins{x_min - 0.5 * h, x_max + 0.5 * h, n};
        const auto hist = mc::mc_density_histogram(ens, bins);
        const double nw = static_cast<double>(sc.n_paths) * h;
        for (std::size_t i = 0; i < n; ++i) {
            mc_col.push_back(hist.density[i]);
            // binomial standard error with a one-count floor
            const double se = std::sqrt((closed[i] + 1.0 / nw) / nw);
            mc_z = std::max(mc_z, std::abs(hist.density[i] - closed[i]) / se);
        }
    }

    const fs::path out_path = str(cfg, "out");
    {
        auto f = open_out(out_path);
        f << "x,closed_form" << (with_fp ? ",fp" : "") << (with_mc ? ",mc" : "") << '\n';
        for (std::size_t i = 0; i < n; ++i) {
            f << fmt(xs[i]) << ',' << fmt(closed[i]);
            if (with_fp) f << ',' << fmt(fp_col[i]);
            if (with_mc) f << ',' << fmt(mc_col[i]);
            f << '\n';
        }
    }
    write_config_beside(out_path, cfg);

    const auto mass = density_mass(p, x0, t);
    out << "normalization," << fmt(mass.value) << '\n';
    bool ok = std::abs(mass.value - 1.0) <= num(cfg, "norm_tolerance");
    if (with_fp) {
        out << "max_abs_fp_discrepancy," << fmt(fp_max) << '\n';
        ok = ok && fp_max <= num(cfg, "fp_tolerance");
    }
    if (with_mc) {
        out << "max_mc_z_score," << fmt(mc_z) << '\n';
        ok = ok && mc_z <= num(cfg, "mc_z_max");
    }
    out << "wrote," << out_path.string() << '\n';
    if (!ok) throw ToleranceFailure{"density discrepancy above tolerance"};
}

// ----------------------------------------------------------- default-prob

void cmd_default_prob(const json& cfg, std::ostream& out) {
    const ModelParams p = ModelParams::from_threshold_price(num(cfg, "nu"), num(cfg, "sigma"),
                                                            num(cfg, "s_star"));
    const double s0 = num(cfg, "s0");
    require(s0 > 0.0, "s0 must be > 0");
    const double x0 = std::log(s0);
    const Direction dir = outbound_direction(p, x0);
    const auto horizons = cfg.at("horizons").get<std::vector<double>>();
    require(!horizons.empty(), "horizons must not be empty");
    const double threshold = num(cfg, "validity_threshold");
    const double limit = default_prob_asymptotic(p, s0, dir).value;

    std::ostringstream table;
    table << "horizon,finite_prob,asymptotic_prob,gap,sigma_nu_sqrt_t,validity\n";
    for (double T : horizons) {
        const double finite = regime_transition_prob_finite(p, x0, T, dir).value;
        const double snt = p.sigma() * p.nu() * std::sqrt(T);
        table << fmt(T) << ',' << fmt(finite) << ',' << fmt(limit) << ','
              << fmt(std::abs(finite - limit)) << ',' << fmt(snt) << ','
              << (snt >= threshold ? "ok" : "outside") << '\n';
    }
    const fs::path out_path = str(cfg, "out");
    {
        auto f = open_out(out_path);
        f << table.str();
    }
    write_config_beside(out_path, cfg);
    out << "direction,"
        << (dir == Direction::HealthyToDistressed ? "healthy_to_distressed" : "distressed_to_healthy")
        << '\n'
        << table.str();
}

// --------------------------------------------------------------- simulate

void cmd_simulate(const json& cfg, std::ostream& out) {
    const ModelParams p = model_of(cfg);
    mc::SimConfig sc{.n_paths = count(cfg, "n_paths", 1), .dt = num(cfg, "dt"),
                     .horizon = num(cfg, "horizon"), .seed = seed_of(cfg), .x0 = num(cfg, "x0"),
                     .store_paths = cfg.at("store_paths").get<bool>()};
    const auto ens = mc::simulate(p, sc);
    const fs::path out_path = str(cfg, "out");
    {
        auto f = open_out(out_path);
        mc::write_ensemble_csv(ens, f);
    }
    write_config_beside(out_path, cfg);
    double mean = 0.0;
    for (double x : ens.terminal) mean += x;
    mean /= static_cast<double>(ens.n_paths());
    out << "paths," << ens.n_paths() << "\nsteps," << sc.steps() << "\nmean_terminal," << fmt(mean)
        << "\nwrote," << out_path.string() << '\n';
}

// --------------------------------------------------------------- fp-check

void cmd_fp_check(const json& cfg, std::ostream& out) {
    const ModelParams p = model_of(cfg);
    const double x0 = num(cfg, "x0");
    const double t = num(cfg, "t");
    require(t > 0.0, "t must be > 0");
    require(p.sigma() > 0.0, "sigma must be > 0");
    const double margin = 5.0 * p.sigma() * std::sqrt(t) + p.mu_tilde() * t;
    const double x_min = cfg["x_min"].is_null() ? x0 - 1.2 * margin : num(cfg, "x_min");
    const double x_max = cfg["x_max"].is_null() ? x0 + 1.2 * margin : num(cfg, "x_max");
    const auto grid = fp::GridSpec::with_spacing(x_min, x_max, num(cfg, "dx"), num(cfg, "dt"));
    const auto field = fp::solve_fp(p, x0, t, grid);

    std::vector<double> closed(grid.n_x);
    double peak = 0.0;
    for (std::size_t i = 0; i < grid.n_x; ++i) {
        closed[i] = transition_density(p, {grid.x(i), x0, t});
        peak = std::max(peak, closed[i]);
    }
    double rel = 0.0;
    for (std::size_t i = 0; i < grid.n_x; ++i) {
        if (closed[i] > 1e-6 * peak) rel = std::max(rel, std::abs(field.values[i] - closed[i]) / closed[i]);
    }
    const fs::path out_path = str(cfg, "out");
    {
        auto f = open_out(out_path);
        f << "x,density,closed_form\n";
        for (std::size_t i = 0; i < grid.n_x; ++i) {
            f << fmt(grid.x(i)) << ',' << fmt(field.values[i]) << ',' << fmt(closed[i]) << '\n';
        }
    }
    write_config_beside(out_path, cfg);
    out << "grid_points," << grid.n_x << "\nmass," << fmt(field.mass()) << "\nmax_rel_error,"
        << fmt(rel) << '\n';
    if (p.x_star() > grid.x_min && p.x_star() < grid.x_max) {
        const Direction dir = outbound_direction(p, x0);
        out << "fp_transition_prob," << fmt(fp::fp_transition_prob(field, p.x_star(), dir))
            << "\nquadrature_transition_prob,"
            << fmt(regime_transition_prob_finite(p, x0, t, dir).value) << '\n';
    }
    out << "wrote," << out_path.string() << '\n';
    if (rel > num(cfg, "tolerance")) throw ToleranceFailure{"Fokker-Planck error above tolerance"};
}

// --------------------------------------------------------- synth-universe

std::string name_for(std::size_t i, std::size_t n) {
    const int width = std::max(3, static_cast<int>(std::to_string(n - 1).size()));
    std::ostringstream s;
    s << 'N' << std::setw(width) << std::setfill('0') << i;
    return s.str();
}

double draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t index, double lo, double hi) {
    return lo + (hi - lo) * rng::uniform_at(seed, stream, index);
}

void require_range(const json& cfg, const char* lo, const char* hi) {
    require(num(cfg, lo) <= num(cfg, hi), std::string(lo) + " must be <= " + hi);
}

void cmd_synth_universe(const json& cfg, std::ostream& out) {
    const std::size_t n_names = count(cfg, "n_names", 1);
    const std::size_t n_days = count(cfg, "n_days", 2);
    const std::uint64_t seed = seed_of(cfg);
    require_range(cfg, "nu_min", "nu_max");
    require_range(cfg, "sigma_min", "sigma_max");
    require_range(cfg, "s_star_min", "s_star_max");
    require_range(cfg, "ratio_min", "ratio_max");
    require(num(cfg, "nu_min") >= 0.0, "nu_min must be >= 0");
    require(num(cfg, "sigma_min") > 0.0, "sigma_min must be > 0");
    require(num(cfg, "s_star_min") > 0.0, "s_star_min must be > 0");
    require(num(cfg, "ratio_min") > 1.0, "ratio_min must be > 1 so that S0 > S_star");
    const double noise = num(cfg, "noise_sigma");
    require(noise >= 0.0, "noise_sigma must be >= 0");
    const cds::SpreadModelConfig spread_cfg(num(cfg, "recovery"), num(cfg, "maturity"));
    require(spread_cfg.normalization() > 0.0, "recovery must be < 1 for positive spreads");

    const fs::path dir = str(cfg, "out_dir");
    fs::create_directories(dir / "prices");
    fs::create_directories(dir / "spreads");
    const auto dates = business_days(parse_date(str(cfg, "start_date")), n_days);
    constexpr double kDay = 1.0 / 252.0;

    std::ostringstream manifest, truth;
    manifest << "name,price_file,spread_file\n";
    truth << "name,nu,sigma,s_star,s0\n";
    std::size_t missing_total = 0;
    for (std::size_t i = 0; i < n_names; ++i) {
        const std::string name = name_for(i, n_names);
        const double nu = draw(seed, i, 0, num(cfg, "nu_min"), num(cfg, "nu_max"));
        const double sigma = draw(seed, i, 1, num(cfg, "sigma_min"), num(cfg, "sigma_max"));
        const double s_star = draw(seed, i, 2, num(cfg, "s_star_min"), num(cfg, "s_star_max"));
        const double s0 = s_star * draw(seed, i, 3, num(cfg, "ratio_min"), num(cfg, "ratio_max"));
        const auto params = ModelParams::from_threshold_price(nu, sigma, s_star);

        mc::SimConfig sc{.n_paths = 1, .dt = kDay, .horizon = static_cast<double>(n_days - 1) * kDay,
                         .seed = rng::derive_seed(seed, i), .x0 = std::log(s0),
                         .store_paths = true, .threads = 1};
        const auto ens = mc::simulate(params, sc);
        const auto path = ens.path(0);
        const std::uint64_t noise_seed = rng::derive_seed(seed, i | (1ull << 40));

        xs::PriceSeries prices{.name = name, .prices = {}};
        cds::SpreadSeries spreads{.name = name, .observations = {}};
        for (std::size_t d = 0; d < n_days; ++d) {
            const double price = std::exp(path[d]);
            prices.prices.emplace(dates[d], price);
            if (price <= s_star) {
                // no quote in the distressed regime
                ++missing_total;
                continue;
            }
            double z = cds::synth_spread(params, spread_cfg, price);
            if (noise > 0.0) z *= std::exp(noise * rng::normal_at(noise_seed, 0, d));
            spreads.observations.push_back({dates[d], price, z});
        }
        {
            auto f = open_out(dir / "prices" / (name + ".csv"));
            xs::write_price_csv(prices, f);
        }
        {
            auto f = open_out(dir / "spreads" / (name + ".csv"));
            cds::write_spread_csv(spreads, f);
        }
        manifest << name << ",prices/" << name << ".csv,spreads/" << name << ".csv\n";
        truth << name << ',' << fmt(nu) << ',' << fmt(sigma) << ',' << fmt(s_star) << ','
              << fmt(s0) << '\n';
    }
    {
        auto f = open_out(dir / "manifest.csv");
        f << manifest.str();
    }
    {
        auto f = open_out(dir / "truth.csv");
        f << truth.str();
    }
    write_json(dir / "config.json", cfg);
    out << "names," << n_names << "\ndays," << n_days << "\nunquoted_days," << missing_total
        << "\nwrote," << dir.string() << '\n';
}

// ---------------------------------------------------------------- extract

void cmd_extract(const json& cfg, std::ostream& out, std::ostream& err) {
    const auto entries = read_manifest(str(cfg, "manifest"));
    const std::size_t window = count(cfg, "window", 1);
    const std::size_t stride = count(cfg, "stride", 1);
    std::vector<cds::SignalRecord> all;
    std::vector<std::pair<std::string, std::string>> failures;
    std::size_t skipped_windows = 0;
    for (const auto& e : entries) {
        try {
            const auto series = cds::read_spread_csv(e.spread_file, e.name);
            std::vector<cds::SkippedWindow> skipped;
            auto records = cds::rolling_extract(series, window, stride, &skipped);
            skipped_windows += skipped.size();
            all.insert(all.end(), records.begin(), records.end());
        } catch (const Error& ex) {
            failures.emplace_back(e.name, ex.what());
        }
    }
    for (const auto& [name, why] : failures) err << "extract: " << name << ": " << why << '\n';
    if (all.empty()) fail(ErrorKind::EmptyResult, "no name produced a signal");

    const fs::path out_path = str(cfg, "out");
    {
        auto f = open_out(out_path);
        cds::write_signals_csv(all, f);
    }
    write_config_beside(out_path, cfg);
    out << "names," << entries.size() << "\nfailed_names," << failures.size() << "\nsignals,"
        << all.size() << "\nskipped_windows," << skipped_windows << "\nwrote," << out_path.string()
        << '\n';
}

// --------------------------------------------------------------- backtest

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(); }

void cmd_backtest(const json& cfg, std::ostream& out) {
    const auto entries = read_manifest(str(cfg, "manifest"));
    std::vector<xs::PriceSeries> prices;
    for (const auto& e : entries) prices.push_back(xs::read_price_csv(e.price_file, e.name));
    const auto signals = cds::read_signals_csv(str(cfg, "signals"));

    xs::Schedule schedule;
    schedule.rebalance_every = count(cfg, "rebalance_every", 1);
    if (!cfg["first_rebalance"].is_null()) schedule.first_rebalance = parse_date(str(cfg, "first_rebalance"));
    const std::string key = str(cfg, "ranking_key");
    if (key == "nu_hat") schedule.key = xs::RankingKey::NuHat;
    else if (key == "mu_tilde") schedule.key = xs::RankingKey::MuTilde;
    else fail(ErrorKind::Validation, "ranking_key must be nu_hat or mu_tilde");

    const auto report = xs::backtest(signals, prices, schedule);

    json j;
    j["n_days"] = report.n_days;
    j["mean_return"] = report.mean_return;
    j["volatility"] = report.volatility;
    j["sharpe_annualized"] = optional_number(report.sharpe_annualized);
    j["sharpe_defined"] = report.sharpe_annualized.has_value();
    j["turnover_avg"] = report.turnover_avg;
    j["long_mean_return"] = optional_number(report.long_mean_return);
    j["short_mean_return"] = optional_number(report.short_mean_return);
    j["n_rebalances"] = report.rebalances.size();
    j["flat_rebalances"] = report.flat_rebalances;
    j["dropped"] = json::array();
    for (const auto& d : report.dropped) j["dropped"].push_back({{"name", d.name}, {"date", format_date(d.date)}});
    if (!cfg["truth"].is_null()) {
        const csv::Table t = csv::read(str(cfg, "truth"));
        std::map<std::string, double> truth;
        for (const auto& row : t.rows) truth[row[t.column("name")]] = csv::to_double(row[t.column("nu")], "nu");
        j["spearman_true_vs_extracted"] = xs::signal_quality(truth, xs::mean_signal(signals));
    }
    j["daily_returns"] = json::array();
    for (const auto& d : report.daily_returns) {
        j["daily_returns"].push_back({{"date", format_date(d.date)},
                                      {"return", d.portfolio},
                                      {"long_leg", optional_number(d.long_leg)},
                                      {"short_leg", optional_number(d.short_leg)}});
    }

    const fs::path dir = str(cfg, "out_dir");
    fs::create_directories(dir / "weights");
    for (const auto& snap : report.rebalances) {
        auto f = open_out(dir / "weights" / (format_date(snap.date) + ".csv"));
        xs::write_weights_csv(snap, f);
    }
    write_json(dir / "report.json", j);
    write_json(dir / "config.json", cfg);

    out << "n_days," << report.n_days << "\nsharpe_annualized,"
        << (report.sharpe_annualized ? fmt(*report.sharpe_annualized) : "undefined")
        << "\nlong_mean_return," << (report.long_mean_return ? fmt(*report.long_mean_return) : "none")
        << "\nshort_mean_return," << (report.short_mean_return ? fmt(*report.short_mean_return) : "none")
        << "\nturnover_avg," << fmt(report.turnover_avg) << "\ndropped_positions,"
        << report.dropped.size() << '\n';
    if (j.contains("spearman_true_vs_extracted")) {
        out << "spearman_true_vs_extracted," << fmt(j["spearman_true_vs_extracted"].get<double>()) << '\n';
    }
    out << "wrote," << dir.string() << '\n';
}

}  // namespace

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
    const csv::Table t = csv::read(path);
    const auto c_name = t.column("name");
    const auto c_price = t.column("price_file");
    const auto c_spread = t.column("spread_file");
    const fs::path base = path.parent_path();
    std::vector<ManifestEntry> out;
    for (const auto& row : t.rows) {
        auto resolve = [&](const std::string& p) {
            const fs::path f(p);
            return f.is_absolute() ? f : base / f;
        };
        out.push_back({row[c_name], resolve(row[c_price]), resolve(row[c_spread])});
    }
    return out;
}

int run_command(const json& resolved_in, std::ostream& out, std::ostream& err) {
    try {
        const json cfg = absolutize_paths(resolved_in);
        const std::string command = cfg.at("command").get<std::string>();
        if (command == "density") cmd_density(cfg, out);
        else if (command == "default-prob") cmd_default_prob(cfg, out);
        else if (command == "simulate") cmd_simulate(cfg, out);
        else if (command == "fp-check") cmd_fp_check(cfg, out);
        else if (command == "synth-universe") cmd_synth_universe(cfg, out);
        else if (command == "extract") cmd_extract(cfg, out, err);
        else if (command == "backtest") cmd_backtest(cfg, out);
        else fail(ErrorKind::Validation, "unknown command '" + command + "'");
        return kExitOk;
    } catch (const ToleranceFailure& e) {
        err << "error: " << e.what << '\n';
        return kExitTolerance;
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const json::exception& e) {
        err << "error (Validation): " << e.what() << '\n';
        return kExitValidation;
    } catch (const fs::filesystem_error& e) {
        err << "error (Io): " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}

}  // namespace regime::cli
