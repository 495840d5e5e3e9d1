#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace regime::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column position by name; throws Parse if absent.
    std::size_t column(std::string_view name) const;
};

/// Reads a comma-separated file with a header row. Blank lines are skipped;
/// every row must have as many fields as the header. No quoting support.
Table read(const std::filesystem::path& path);
Table parse(std::string_view text, std::string_view source = "<memory>");

/// Strict decimal parse of a whole field; throws Parse.
double to_double(std::string_view field, std::string_view what);
long long to_integer(std::string_view field, std::string_view what);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

}  // namespace regime::csv
