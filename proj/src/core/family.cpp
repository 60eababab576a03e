#include "unicrop/core/family.hpp"

#include <algorithm>
#include <cctype>

namespace unicrop {

const char* family_name(Family family) {
    switch (family) {
    case Family::meteorology: return "METEOROLOGY";
    case Family::vegetation: return "VEGETATION";
    case Family::sar: return "SAR";
    case Family::soil: return "SOIL";
    case Family::topography: return "TOPOGRAPHY";
    }
    return "UNKNOWN";
}

std::optional<Family> family_from_name(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    for (Family family : kAllFamilies) {
        if (upper == family_name(family)) return family;
    }
    return std::nullopt;
}

} // namespace unicrop
