#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace unicrop {

// The five environmental data families. Grouping drives the per-family
// imputation strategy and the family-preservation step of screening.
enum class Family {
    meteorology,
    vegetation,
    sar,
    soil,
    topography,
};

inline constexpr std::array<Family, 5> kAllFamilies = {
    Family::meteorology, Family::vegetation, Family::sar, Family::soil, Family::topography,
};

const char* family_name(Family family);
std::optional<Family> family_from_name(std::string_view name);

} // namespace unicrop
