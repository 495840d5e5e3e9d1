#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace regime::cli {

enum class FieldKind { Number, Integer, Boolean, String, NumberList };

struct Field {
    std::string key;  // snake_case config key; the CLI flag is --key-with-dashes
    FieldKind kind;
    nlohmann::json default_value;  // null: optional without default
    std::string help;
};

struct CommandSpec {
    std::string name;
    std::string description;
    std::vector<Field> fields;

    const Field* find(const std::string& key) const;
};

const std::vector<CommandSpec>& command_specs();
const CommandSpec& command_spec(const std::string& name);

/// CLI flag name for a config key: x_star -> --x-star.
std::string flag_name(const std::string& key);

/// defaults <- config file <- flag overrides, type-checked field by field.
/// Unknown keys or a mismatched "command" entry throw Validation. The result
/// carries "command" plus every field (null for unset optional fields).
nlohmann::json resolve_config(const CommandSpec& spec,
                              const std::optional<std::filesystem::path>& config_file,
                              const std::map<std::string, std::string>& overrides);

/// Same, starting from an in-memory object instead of a file.
nlohmann::json resolve_config(const CommandSpec& spec, const nlohmann::json& file_values,
                              const std::map<std::string, std::string>& overrides);

}  // namespace regime::cli
