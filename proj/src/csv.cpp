#include "regime/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "regime/errors.hpp"

namespace regime::csv {

namespace {

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string_view field = line.substr(start, comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
            field.remove_suffix(1);
        fields.emplace_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    fail(ErrorKind::Parse, "missing CSV column '" + std::string(name) + "'");
}

Table parse(std::string_view text, std::string_view source) {
    Table table;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    bool have_header = false;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        auto fields = split(line);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size()) {
            fail(ErrorKind::Parse, std::string(source) + ":" + std::to_string(line_no) +
                                       ": expected " + std::to_string(table.header.size()) +
                                       " fields, got " + std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    if (!have_header) fail(ErrorKind::Parse, std::string(source) + ": empty CSV (no header)");
    return table;
}

Table read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

double to_double(std::string_view field, std::string_view what) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
        fail(ErrorKind::Parse, "invalid number '" + std::string(field) + "' for " + std::string(what));
    }
    return value;
}

long long to_integer(std::string_view field, std::string_view what) {
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
        fail(ErrorKind::Parse, "invalid integer '" + std::string(field) + "' for " + std::string(what));
    }
    return value;
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

}  // namespace regime::csv
