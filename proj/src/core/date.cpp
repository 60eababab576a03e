#include "unicrop/core/date.hpp"

#include <cstdio>

namespace unicrop {

bool is_leap_year(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
    static const int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month < 1 || month > 12) return 0;
    if (month == 2 && is_leap_year(year)) return 29;
    return lengths[month - 1];
}

std::string Date::to_iso() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

// days_from_civil / civil_from_days (Howard Hinnant's algorithms).
long Date::serial() const {
    long y = year;
    const long m = month;
    const long d = day;
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

Date Date::from_serial(long days) {
    long z = days + 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long y = static_cast<long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

std::optional<Date> Date::parse(const std::string& text) {
    if (text.size() < 8 || text.size() > 10) return std::nullopt;
    char sep = 0;
    int fields[3] = {0, 0, 0};
    int field = 0;
    int digits = 0;
    for (char c : text) {
        if (c >= '0' && c <= '9') {
            fields[field] = fields[field] * 10 + (c - '0');
            ++digits;
            if (digits > 4 || (field > 0 && digits > 2)) return std::nullopt;
        } else if (c == '-' || c == '/' || c == '.') {
            if (sep == 0) sep = c;
            if (c != sep || digits == 0 || field >= 2) return std::nullopt;
            ++field;
            digits = 0;
        } else {
            return std::nullopt;
        }
    }
    if (field != 2 || digits == 0) return std::nullopt;
    Date date{fields[0], fields[1], fields[2]};
    if (date.year < 1 || date.month < 1 || date.month > 12) return std::nullopt;
    if (date.day < 1 || date.day > days_in_month(date.year, date.month)) return std::nullopt;
    return date;
}

long window_days(const Date& start, const Date& end) {
    return end.serial() - start.serial() + 1;
}

} // namespace unicrop
