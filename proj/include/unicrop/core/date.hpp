#pragma once

#include <compare>
#include <optional>
#include <string>

namespace unicrop {

// Calendar date. All pipeline dates are normalised to ISO-8601 at parse time
// and kept in this form; comparisons follow calendar order.
struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    auto operator<=>(const Date&) const = default;

    std::string to_iso() const;

    // Days since the civil epoch 1970-01-01 (may be negative).
    long serial() const;

    static Date from_serial(long days);

    // Accepts YYYY-MM-DD, YYYY/MM/DD and YYYY.MM.DD with real calendar
    // validation. Returns nullopt for anything else.
    static std::optional<Date> parse(const std::string& text);
};

bool is_leap_year(int year);
int days_in_month(int year, int month);

// Inclusive day count of [start, end]; zero-width windows count one day.
long window_days(const Date& start, const Date& end);

} // namespace unicrop
