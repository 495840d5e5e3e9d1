#include "regime/cli/config.hpp"

#include <fstream>
#include <sstream>

#include "regime/csv.hpp"
#include "regime/errors.hpp"

namespace regime::cli {

using nlohmann::json;

const Field* CommandSpec::find(const std::string& key) const {
    for (const auto& f : fields) {
        if (f.key == key) return &f;
    }
    return nullptr;
}

namespace {

using K = FieldKind;

std::vector<Field> model_fields(double nu, double sigma, double x_star) {
    return {
        {"nu", K::Number, nu, "regime sharpness nu >= 0"},
        {"sigma", K::Number, sigma, "volatility per sqrt(year)"},
        {"x_star", K::Number, x_star, "log-price threshold"},
    };
}

std::vector<Field> concat(std::vector<Field> a, const std::vector<Field>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

std::vector<CommandSpec> build_specs() {
    std::vector<CommandSpec> specs;
    specs.push_back({"density", "closed-form transition density on a grid, with optional oracles",
                     concat(model_fields(1.0, 0.2, 0.0),
                            {
                                {"x0", K::Number, 0.0, "initial log-price"},
                                {"t", K::Number, 1.0, "elapsed time in years"},
                                {"x_min", K::Number, json(), "grid start (default x0 - 5 sigma sqrt(t) - mu_tilde t)"},
                                {"x_max", K::Number, json(), "grid end (default symmetric to x_min)"},
                                {"n_points", K::Integer, 201, "grid points"},
                                {"compare_fp", K::Boolean, false, "add the Fokker-Planck column"},
                                {"compare_mc", K::Boolean, false, "add the Monte Carlo histogram column"},
                                {"fp_dx", K::Number, 0.005, "Fokker-Planck grid spacing"},
                                {"fp_dt", K::Number, 1e-4, "Fokker-Planck time step"},
                                {"fp_tolerance", K::Number, 1e-3, "max |fp - closed form|"},
                                {"mc_paths", K::Integer, 100000, "Monte Carlo paths"},
                                {"mc_dt", K::Number, 0.01, "Euler step"},
                                {"mc_z_max", K::Number, 5.0, "max |hist - closed form| in bin standard errors"},
                                {"seed", K::Integer, 1, "random seed"},
                                {"norm_tolerance", K::Number, 1e-8, "max |integral - 1|"},
                                {"out", K::String, "density.csv", "output CSV"},
                            })});
    specs.push_back({"default-prob", "finite-horizon and asymptotic regime transition probabilities",
                     {
                         {"nu", K::Number, 1.0, "regime sharpness nu >= 0"},
                         {"sigma", K::Number, 0.2, "volatility per sqrt(year)"},
                         {"s_star", K::Number, 100.0, "threshold price"},
                         {"s0", K::Number, 150.0, "initial price"},
                         {"horizons", K::NumberList, json::array({25.0, 100.0, 400.0}), "horizon ladder in years"},
                         {"validity_threshold", K::Number, 3.0, "flag rows with sigma nu sqrt(T) below this"},
                         {"out", K::String, "default_prob.csv", "output CSV"},
                     }});
    specs.push_back({"simulate", "Euler-Maruyama path ensemble",
                     concat(model_fields(1.0, 0.2, 0.0),
                            {
                                {"x0", K::Number, 0.0, "initial log-price"},
                                {"n_paths", K::Integer, 1000, "number of paths"},
                                {"dt", K::Number, 0.01, "time step in years"},
                                {"horizon", K::Number, 1.0, "horizon in years"},
                                {"seed", K::Integer, 1, "random seed"},
                                {"store_paths", K::Boolean, false, "dump every step instead of X_T only"},
                                {"out", K::String, "ensemble.csv", "output CSV (path_id,step,x)"},
                            })});
    specs.push_back({"fp-check", "Fokker-Planck solve compared with the closed-form density",
                     concat(model_fields(1.0, 0.2, 0.0),
                            {
                                {"x0", K::Number, 0.5, "initial log-price"},
                                {"t", K::Number, 2.0, "horizon in years"},
                                {"dx", K::Number, 0.005, "grid spacing"},
                                {"dt", K::Number, 1e-4, "time step"},
                                {"x_min", K::Number, json(), "grid start (default x0 - 1.2 * required margin)"},
                                {"x_max", K::Number, json(), "grid end (default x0 + 1.2 * required margin)"},
                                {"tolerance", K::Number, 1e-2, "max relative error where density > 1e-6 of peak"},
                                {"out", K::String, "fp_check.csv", "output CSV (x,density,closed_form)"},
                            })});
    specs.push_back({"synth-universe", "synthetic price and CDS spread universe",
                     {
                         {"n_names", K::Integer, 100, "number of names"},
                         {"seed", K::Integer, 1, "random seed"},
                         {"start_date", K::String, "2021-01-04", "first trading day"},
                         {"n_days", K::Integer, 504, "trading days per name"},
                         {"nu_min", K::Number, 1.0, "lower bound of nu"},
                         {"nu_max", K::Number, 3.0, "upper bound of nu"},
                         {"sigma_min", K::Number, 0.2, "lower bound of sigma"},
                         {"sigma_max", K::Number, 0.4, "upper bound of sigma"},
                         {"s_star_min", K::Number, 20.0, "lower bound of the threshold price"},
                         {"s_star_max", K::Number, 100.0, "upper bound of the threshold price"},
                         {"ratio_min", K::Number, 3.0, "lower bound of S0 / S_star"},
                         {"ratio_max", K::Number, 10.0, "upper bound of S0 / S_star"},
                         {"recovery", K::Number, 0.4, "recovery rate R"},
                         {"maturity", K::Number, 5.0, "CDS maturity in years"},
                         {"noise_sigma", K::Number, 0.0, "lognormal spread observation noise"},
                         {"out_dir", K::String, "universe", "output directory"},
                     }});
    specs.push_back({"extract", "rolling log-log regression of spreads on prices",
                     {
                         {"manifest", K::String, "universe/manifest.csv", "universe manifest"},
                         {"window", K::Integer, 21, "window length in trading days"},
                         {"stride", K::Integer, 21, "window stride in trading days"},
                         {"out", K::String, "signals.csv", "signal CSV"},
                     }});
    specs.push_back({"backtest", "dollar-neutral decile backtest on extracted signals",
                     {
                         {"manifest", K::String, "universe/manifest.csv", "universe manifest"},
                         {"signals", K::String, "signals.csv", "signal CSV"},
                         {"rebalance_every", K::Integer, 21, "trading days between rebalances"},
                         {"first_rebalance", K::String, json(), "first rebalance date (default: first signal)"},
                         {"ranking_key", K::String, "nu_hat", "nu_hat or mu_tilde"},
                         {"truth", K::String, json(), "optional truth.csv for rank correlation"},
                         {"out_dir", K::String, "backtest", "output directory"},
                     }});
    return specs;
}

json parse_value(const Field& f, const std::string& text) {
    switch (f.kind) {
        case K::Number: return csv::to_double(text, f.key);
        case K::Integer: return csv::to_integer(text, f.key);
        case K::Boolean:
            if (text == "true" || text == "1") return true;
            if (text == "false" || text == "0") return false;
            fail(ErrorKind::Validation, "--" + flag_name(f.key) + " expects true or false");
        case K::String: return text;
        case K::NumberList: {
            json list = json::array();
            std::stringstream ss(text);
            std::string item;
            while (std::getline(ss, item, ',')) list.push_back(csv::to_double(item, f.key));
            return list;
        }
    }
    return json();
}

void check_type(const Field& f, const json& v) {
    if (v.is_null() && f.default_value.is_null()) return;
    bool ok = false;
    switch (f.kind) {
        case K::Number: ok = v.is_number(); break;
        case K::Integer: ok = v.is_number_integer(); break;
        case K::Boolean: ok = v.is_boolean(); break;
        case K::String: ok = v.is_string(); break;
        case K::NumberList:
            ok = v.is_array();
            if (ok) for (const auto& e : v) ok = ok && e.is_number();
            break;
    }
    if (!ok) fail(ErrorKind::Validation, "config key '" + f.key + "' has the wrong type");
}

}  // namespace

const std::vector<CommandSpec>& command_specs() {
    static const std::vector<CommandSpec> specs = build_specs();
    return specs;
}

const CommandSpec& command_spec(const std::string& name) {
    for (const auto& s : command_specs()) {
        if (s.name == name) return s;
    }
    fail(ErrorKind::Validation, "unknown command '" + name + "'");
}

std::string flag_name(const std::string& key) {
    std::string out = key;
    for (char& c : out) {
        if (c == '_') c = '-';
    }
    return out;
}

json resolve_config(const CommandSpec& spec, const json& file_values,
                    const std::map<std::string, std::string>& overrides) {
    json resolved = json::object();
    resolved["command"] = spec.name;
    for (const auto& f : spec.fields) resolved[f.key] = f.default_value;

    if (!file_values.is_null()) {
        if (!file_values.is_object()) fail(ErrorKind::Validation, "config must be a JSON object");
        for (const auto& [key, value] : file_values.items()) {
            if (key == "command") {
                if (value != spec.name) {
                    fail(ErrorKind::Validation, "config is for command '" + value.dump() +
                                                    "', not '" + spec.name + "'");
                }
                continue;
            }
            const Field* f = spec.find(key);
            if (!f) fail(ErrorKind::Validation, "unknown config key '" + key + "' for " + spec.name);
            check_type(*f, value);
            resolved[key] = value;
        }
    }
    for (const auto& [key, text] : overrides) {
        const Field* f = spec.find(key);
        if (!f) fail(ErrorKind::Validation, "unknown option '" + key + "' for " + spec.name);
        resolved[key] = parse_value(*f, text);
    }
    // Integers given where a Number is expected are stored as doubles so that
    // re-serialized configs are stable.
    for (const auto& f : spec.fields) {
        if (f.kind == K::Number && resolved[f.key].is_number()) {
            resolved[f.key] = resolved[f.key].get<double>();
        }
        if (f.kind == K::NumberList && resolved[f.key].is_array()) {
            for (auto& e : resolved[f.key]) e = e.get<double>();
        }
    }
    return resolved;
}

json resolve_config(const CommandSpec& spec,
                    const std::optional<std::filesystem::path>& config_file,
                    const std::map<std::string, std::string>& overrides) {
    json file_values;
    if (config_file) {
        std::ifstream in(*config_file);
        if (!in) fail(ErrorKind::Io, "cannot open config '" + config_file->string() + "'");
        try {
            file_values = json::parse(in);
        } catch (const json::parse_error& e) {
            fail(ErrorKind::Validation, "malformed config '" + config_file->string() + "': " + e.what());
        }
    }
    return resolve_config(spec, file_values, overrides);
}

}  // namespace regime::cli
