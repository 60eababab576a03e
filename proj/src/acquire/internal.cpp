#include "internal.hpp"

#include <chrono>
#include <ctime>
#include <sstream>

#include "unicrop/core/csv.hpp"

namespace unicrop::acquire {

std::string series_to_csv(const TimeSeries& series) {
    std::ostringstream out;
    out << "date,value\n";
    for (const auto& point : series) {
        csv::write_row(out, {point.date.to_iso(), format_cell(point.value)});
    }
    return out.str();
}

SeriesParse series_from_csv(const std::string& text) {
    SeriesParse result;
    auto rows = csv::parse(text);
    size_t start = 0;
    if (!rows.empty() && !rows[0].empty() && rows[0][0] == "date") start = 1;
    for (size_t i = start; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() < 2) {
            result.error = "row " + std::to_string(i + 1) + " has fewer than two cells";
            return result;
        }
        const auto date = Date::parse(row[0]);
        if (!date) {
            result.error = "bad date '" + row[0] + "' on row " + std::to_string(i + 1);
            return result;
        }
        const auto cell = parse_cell(row[1]);
        if (!cell.ok) {
            result.error = "bad value '" + row[1] + "' on row " + std::to_string(i + 1);
            return result;
        }
        result.series.push_back({*date, cell.value});
    }
    result.ok = true;
    return result;
}

std::string now_iso() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

} // namespace unicrop::acquire
