// date.hpp
// Calendar dates as std::chrono::year_month_day with ISO-8601 text conversion.

#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace mfindex {

using Date = std::chrono::year_month_day;

/// Parses "YYYY-MM-DD". Returns nullopt for anything else, including invalid days.
std::optional<Date> parse_date(std::string_view text);

std::string format_date(const Date& d);

inline int year_of(const Date& d) { return static_cast<int>(d.year()); }

/// Month key (year * 12 + month - 1), monotone in time.
inline int month_key(const Date& d) {
    return static_cast<int>(d.year()) * 12 + static_cast<int>(static_cast<unsigned>(d.month())) - 1;
}

struct DateRange {
    Date first;
    Date last;  // inclusive

    bool contains(const Date& d) const { return first <= d && d <= last; }
    static DateRange year(int y);
};

}  // namespace mfindex
