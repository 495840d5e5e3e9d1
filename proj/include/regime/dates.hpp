#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace regime {

using Date = std::chrono::year_month_day;

/// Parses YYYY-MM-DD; throws Parse on anything else.
Date parse_date(std::string_view text);
std::string format_date(const Date& d);

bool is_weekday(const Date& d);

/// Count of Monday-Friday days since a fixed Monday origin. Saturday and
/// Sunday share the index of the preceding Friday.
std::int64_t business_index(const Date& d);
Date from_business_index(std::int64_t index);

/// `count` consecutive weekdays starting at `first` (moved forward to a
/// weekday if needed).
std::vector<Date> business_days(const Date& first, std::size_t count);

}  // namespace regime
