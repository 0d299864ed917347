#pragma once

#include <compare>
#include <string>
#include <vector>

namespace mcn {

/// Calendar date, no timezone semantics. Comparison is chronological.
struct Date {
    int year = 0;
    int month = 0;  // 1..12
    int day = 0;    // 1..31

    auto operator<=>(const Date&) const = default;

    /// Months since year 0; used to group daily observations into months.
    int month_index() const { return year * 12 + (month - 1); }
};

/// Parses strict ISO-8601 `YYYY-MM-DD`. Throws data_error on malformed input.
Date parse_date(const std::string& text);

/// Formats as `YYYY-MM-DD`.
std::string format_date(const Date& d);

/// `YYYY-MM` month label for monthly panels.
std::string format_month(int month_index);

/// Parses `YYYY-MM` (also accepts a full date and drops the day).
int parse_month(const std::string& text);

/// Synthetic trading calendar: consecutive weekdays starting at `start`.
std::vector<Date> weekday_calendar(Date start, int count);

}  // namespace mcn
