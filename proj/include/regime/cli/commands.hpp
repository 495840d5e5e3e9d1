#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "regime/errors.hpp"

namespace regime::cli {

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitValidation = 2,   // bad flags, config or parameters
    kExitData = 3,         // unreadable or inconsistent input data
    kExitTolerance = 4,    // an oracle comparison exceeded its tolerance
    kExitEmptyResult = 5,
    kExitUniverseTooSmall = 6,
};

int exit_code(ErrorKind kind) noexcept;

/// Runs the command named by resolved["command"]. Results go to files named
/// in the config and a summary to `out`; failures are reported on `err` and
/// mapped to an exit code. The resolved config (paths made absolute) is
/// written next to the outputs.
int run_command(const nlohmann::json& resolved, std::ostream& out, std::ostream& err);

struct ManifestEntry {
    std::string name;
    std::filesystem::path price_file;
    std::filesystem::path spread_file;
};

/// `name,price_file,spread_file`; relative paths resolve against the
/// manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

}  // namespace regime::cli
