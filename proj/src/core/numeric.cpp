#include "unicrop/core/numeric.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "unicrop/core/error.hpp"

namespace unicrop {

namespace {

// Above this magnitude a 1e-6 decimal step is below the double ulp and the
// 6-decimal policy stops round-tripping; such values pass through unrounded.
constexpr double kRoundingLimit = 1e9;

} // namespace

double round6(double value) {
    if (!std::isfinite(value) || std::abs(value) >= kRoundingLimit) return value;
    // Via the rendered decimal so that round6, format_value and re-parsing
    // agree bit for bit.
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    double rounded = std::strtod(buf, nullptr);
    if (rounded == 0.0) rounded = 0.0; // normalise -0
    return rounded;
}

std::string format_value(double value) {
    char buf[64];
    if (!std::isfinite(value) || std::abs(value) >= kRoundingLimit) {
        std::snprintf(buf, sizeof(buf), "%.17g", value);
        return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    std::string text = buf;
    const auto dot = text.find('.');
    if (dot != std::string::npos) {
        auto last = text.find_last_not_of('0');
        if (last == dot) --last;
        text.erase(last + 1);
    }
    if (text == "-0") text = "0";
    return text;
}

std::string format_cell(const Cell& cell) {
    return cell.has_value() ? format_value(*cell) : std::string();
}

std::string format_exact(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::optional<double> parse_double(std::string_view token) {
    if (token.empty()) return std::nullopt;
    std::string buf(token);
    char* end = nullptr;
    const double value = std::strtod(buf.c_str(), &end);
    if (end != buf.c_str() + buf.size()) return std::nullopt;
    return value;
}

std::optional<long> parse_long(std::string_view token) {
    if (token.empty()) return std::nullopt;
    std::string buf(token);
    char* end = nullptr;
    const long value = std::strtol(buf.c_str(), &end, 10);
    if (end != buf.c_str() + buf.size()) return std::nullopt;
    return value;
}

ParsedCell parse_cell(std::string_view token) {
    if (token.empty() || token == "NaN" || token == "nan" || token == "NA" || token == "null") {
        return {true, std::nullopt};
    }
    const auto value = parse_double(token);
    if (!value.has_value() || !std::isfinite(*value)) return {false, std::nullopt};
    return {true, *value};
}

std::uint64_t fnv1a64_combine(std::uint64_t seed, std::string_view bytes) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    return fnv1a64_combine(14695981039346656037ULL, bytes);
}

std::string to_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::uint64_t hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot read " + path.string());
    std::uint64_t h = 14695981039346656037ULL;
    char buf[8192];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        h = fnv1a64_combine(h, std::string_view(buf, static_cast<size_t>(in.gcount())));
    }
    return h;
}

} // namespace unicrop
