#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace unicrop {

// Missing is always explicit; sentinel numbers never enter a table.
using Cell = std::optional<double>;

// Table precision policy: values are stored as doubles rounded to six
// decimals, so the in-memory value, the rendered CSV cell and the re-parsed
// value coincide exactly. Values too large for the policy pass through.
double round6(double value);

// Renders with up to six decimals, trailing zeros trimmed ("2" not
// "2.000000"). Missing renders as the empty string.
std::string format_value(double value);
std::string format_cell(const Cell& cell);

// Bit-faithful rendering (%.17g) for fitted-parameter dumps.
std::string format_exact(double value);

// Strict double parse of a full token; empty, "NaN", "nan", "NA" and "null"
// map to missing, anything else unparseable returns nullopt-of-nullopt
// semantics via the ok flag.
struct ParsedCell {
    bool ok = false;
    Cell value;
};
ParsedCell parse_cell(std::string_view token);

std::optional<double> parse_double(std::string_view token);
std::optional<long> parse_long(std::string_view token);

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64_combine(std::uint64_t seed, std::string_view bytes);
std::string to_hex(std::uint64_t value);

// FNV-1a of the file contents; throws Error{io_error} if unreadable.
std::uint64_t hash_file(const std::filesystem::path& path);

} // namespace unicrop
