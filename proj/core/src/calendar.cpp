#include "mcn/calendar.hpp"

#include "mcn/errors.hpp"

#include <array>
#include <cstdio>

namespace mcn {

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static constexpr std::array<int, 12> kDays{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return kDays[static_cast<size_t>(m - 1)];
}

// Day-of-week via the proleptic Gregorian civil-day count (0 = Monday .. 6 = Sunday).
int weekday(const Date& d) {
    int y = d.year;
    int m = d.month;
    if (m < 3) {
        y -= 1;
        m += 12;
    }
    const int k = y % 100;
    const int j = y / 100;
    const int h = (d.day + 13 * (m + 1) / 5 + k + k / 4 + j / 4 + 5 * j) % 7;
    // Zeller: h = 0 is Saturday; remap so 0 = Monday.
    return (h + 5) % 7;
}

Date next_day(Date d) {
    d.day += 1;
    if (d.day > days_in_month(d.year, d.month)) {
        d.day = 1;
        d.month += 1;
        if (d.month > 12) {
            d.month = 1;
            d.year += 1;
        }
    }
    return d;
}

}  // namespace

Date parse_date(const std::string& text) {
    Date d;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%4d-%2d-%2d%c", &d.year, &d.month, &d.day, &extra) != 3 ||
        text.size() != 10) {
        throw data_error("invalid date (expected YYYY-MM-DD): '" + text + "'");
    }
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) {
        throw data_error("calendar date out of range: '" + text + "'");
    }
    return d;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

std::string format_month(int month_index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", month_index / 12, month_index % 12 + 1);
    return buf;
}

int parse_month(const std::string& text) {
    int y = 0, m = 0;
    if (std::sscanf(text.c_str(), "%4d-%2d", &y, &m) != 2 || m < 1 || m > 12) {
        throw data_error("invalid month (expected YYYY-MM): '" + text + "'");
    }
    return y * 12 + (m - 1);
}

std::vector<Date> weekday_calendar(Date start, int count) {
    std::vector<Date> out;
    out.reserve(static_cast<size_t>(count));
    Date d = start;
    while (static_cast<int>(out.size()) < count) {
        if (weekday(d) < 5) out.push_back(d);
        d = next_day(d);
    }
    return out;
}

}  // namespace mcn
