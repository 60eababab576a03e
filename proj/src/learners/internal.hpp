#pragma once

#include <vector>

#include "unicrop/learners.hpp"

namespace unicrop::learners {

void check_finite(const Dataset& data, const std::vector<double>& target);

inline std::vector<std::vector<double>> to_columns(const Dataset& data) {
    std::vector<std::vector<double>> columns(data.column_count(),
                                             std::vector<double>(data.row_count()));
    for (size_t r = 0; r < data.row_count(); ++r) {
        for (size_t c = 0; c < data.column_count(); ++c) columns[c][r] = data.rows[r][c];
    }
    return columns;
}

} // namespace unicrop::learners
