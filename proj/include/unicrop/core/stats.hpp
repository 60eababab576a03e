#pragma once

#include <optional>
#include <vector>

#include "unicrop/core/numeric.hpp"

namespace unicrop::stats {

double mean(const std::vector<double>& values);

// Sample standard deviation (n-1 denominator); returns 0 for n < 2.
double sample_std(const std::vector<double>& values);

// Linear-interpolation percentile: rank r = q*(n-1) between order
// statistics. q in [0, 1]; values need not be sorted.
double percentile(std::vector<double> values, double q);

double median(const std::vector<double>& values);

// Pearson correlation; returns 0 when either side has zero variance.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Average ranks (ties share the mean rank), 1-based.
std::vector<double> average_ranks(const std::vector<double>& values);

// Spearman rank correlation via Pearson on average ranks.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Pairs where both cells are present, in row order.
struct CompletePairs {
    std::vector<double> x;
    std::vector<double> y;
};
CompletePairs complete_pairs(const std::vector<Cell>& x, const std::vector<Cell>& y);

std::vector<double> non_missing(const std::vector<Cell>& values);

} // namespace unicrop::stats
