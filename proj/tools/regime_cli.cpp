// regime: command-line front end for the tanh-drift regime model.
//
//   regime <command> [--config file.json] [--key value ...]
//
// Every config key is also a flag (x_star -> --x-star). Flags override the
// config file, which overrides built-in defaults.

#include <filesystem>
#include <iostream>
#include <memory>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "regime/cli/commands.hpp"
#include "regime/cli/config.hpp"

int main(int argc, char** argv) {
    using namespace regime::cli;

    CLI::App app{"Tanh-drift regime model: densities, default probabilities, CDS signals"};
    app.require_subcommand(1);
    app.footer(
        "Exit codes: 0 ok, 1 internal, 2 validation, 3 data, 4 tolerance, 5 empty result, "
        "6 universe too small");

    struct Bound {
        CLI::App* sub;
        const CommandSpec* spec;
        std::string config;
        std::map<std::string, std::string> values;
        std::map<std::string, bool> flags;
    };
    std::vector<std::unique_ptr<Bound>> bound;
    for (const auto& spec : command_specs()) {
        auto b = std::make_unique<Bound>();
        b->spec = &spec;
        b->sub = app.add_subcommand(spec.name, spec.description);
        b->sub->add_option("--config", b->config, "JSON config file");
        for (const auto& f : spec.fields) {
            const std::string flag = "--" + flag_name(f.key);
            if (f.kind == FieldKind::Boolean) {
                b->sub->add_flag(flag, b->flags[f.key], f.help);
            } else {
                b->sub->add_option(flag, b->values[f.key], f.help);
            }
        }
        bound.push_back(std::move(b));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitValidation;
    }

    for (const auto& b : bound) {
        if (!b->sub->parsed()) continue;
        std::map<std::string, std::string> overrides;
        for (const auto& f : b->spec->fields) {
            const auto opt = b->sub->get_option("--" + flag_name(f.key));
            if (opt->count() == 0) continue;
            overrides[f.key] = f.kind == FieldKind::Boolean ? "true" : b->values[f.key];
        }
        nlohmann::json resolved;
        try {
            std::optional<std::filesystem::path> file;
            if (!b->config.empty()) file = b->config;
            resolved = resolve_config(*b->spec, file, overrides);
        } catch (const regime::Error& e) {
            std::cerr << "error (" << regime::to_string(e.kind()) << "): " << e.what() << '\n';
            return exit_code(e.kind());
        }
        return run_command(resolved, std::cout, std::cerr);
    }
    return kExitInternal;
}
