#include "regime/dates.hpp"

#include <charconv>
#include <cstdio>

#include "regime/errors.hpp"

namespace regime {

using namespace std::chrono;

namespace {

// 1969-12-29 was a Monday.
constexpr std::int64_t kMondayOffset = 3;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    return a / b - ((a % b != 0) && ((a < 0) != (b < 0)));
}

int parse_int(std::string_view text, std::string_view whole) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        fail(ErrorKind::Parse, "invalid date '" + std::string(whole) + "'");
    }
    return value;
}

}  // namespace

Date parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        fail(ErrorKind::Parse, "invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
    }
    const Date d{year{parse_int(text.substr(0, 4), text)},
                 month{static_cast<unsigned>(parse_int(text.substr(5, 2), text))},
                 day{static_cast<unsigned>(parse_int(text.substr(8, 2), text))}};
    if (!d.ok()) fail(ErrorKind::Parse, "invalid calendar date '" + std::string(text) + "'");
    return d;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

bool is_weekday(const Date& d) {
    const weekday wd{sys_days{d}};
    return wd != Saturday && wd != Sunday;
}

std::int64_t business_index(const Date& d) {
    const std::int64_t days = sys_days{d}.time_since_epoch().count() + kMondayOffset;
    const std::int64_t week = floor_div(days, 7);
    const std::int64_t dow = days - 7 * week;
    return 5 * week + std::min<std::int64_t>(dow, 4);
}

Date from_business_index(std::int64_t index) {
    const std::int64_t week = floor_div(index, 5);
    const std::int64_t dow = index - 5 * week;
    return Date{sys_days{days{7 * week + dow - kMondayOffset}}};
}

std::vector<Date> business_days(const Date& first, std::size_t count) {
    Date start = first;
    while (!is_weekday(start)) start = Date{sys_days{start} + days{1}};
    const std::int64_t origin = business_index(start);
    std::vector<Date> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(from_business_index(origin + static_cast<std::int64_t>(i)));
    }
    return out;
}

}  // namespace regime
