#include <cmath>

#include "unicrop/core/error.hpp"
#include "unicrop/core/rng.hpp"
#include "unicrop/evaluate.hpp"

namespace unicrop::evaluate {

std::vector<size_t> FoldAssignment::rows_in_fold(size_t fold) const {
    std::vector<size_t> rows;
    for (size_t i = 0; i < fold_of_row.size(); ++i) {
        if (fold_of_row[i] == fold) rows.push_back(i);
    }
    return rows;
}

std::vector<size_t> FoldAssignment::rows_not_in_fold(size_t fold) const {
    std::vector<size_t> rows;
    for (size_t i = 0; i < fold_of_row.size(); ++i) {
        if (fold_of_row[i] != fold) rows.push_back(i);
    }
    return rows;
}

FoldAssignment kfold_split(size_t n, size_t k, std::uint64_t seed) {
    if (k < 1 || n < k) {
        throw Error(Errc::too_few_rows, std::to_string(n) + " rows cannot fill " +
                                            std::to_string(k) + " folds");
    }
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    FoldAssignment assignment;
    assignment.seed = seed;
    assignment.folds = k;
    assignment.fold_of_row.assign(n, 0);

    const size_t base = n / k;
    const size_t extra = n % k; // first `extra` folds get one more row
    size_t cursor = 0;
    for (size_t fold = 0; fold < k; ++fold) {
        const size_t size = base + (fold < extra ? 1 : 0);
        for (size_t i = 0; i < size; ++i) assignment.fold_of_row[order[cursor++]] = fold;
    }
    return assignment;
}

MetricSet compute_metrics(const std::vector<double>& observed,
                          const std::vector<double>& predicted) {
    if (observed.size() != predicted.size()) {
        throw Error(Errc::length_mismatch, "observed and predicted lengths differ");
    }
    if (observed.size() < 2) {
        throw Error(Errc::length_mismatch, "metrics need at least two observations");
    }
    const size_t n = observed.size();

    double sse = 0.0, sae = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double err = observed[i] - predicted[i];
        sse += err * err;
        sae += std::abs(err);
    }
    MetricSet metrics;
    metrics.rmse = std::sqrt(sse / static_cast<double>(n));
    metrics.mae = sae / static_cast<double>(n);

    double mean = 0.0;
    for (double y : observed) mean += y;
    mean /= static_cast<double>(n);
    double sst = 0.0;
    for (double y : observed) sst += (y - mean) * (y - mean);
    if (sst > 0.0) metrics.r2 = 1.0 - sse / sst;

    double ape = 0.0;
    size_t used = 0;
    for (size_t i = 0; i < n; ++i) {
        if (observed[i] == 0.0) {
            ++metrics.mape_excluded;
            continue;
        }
        ape += std::abs(observed[i] - predicted[i]) / std::abs(observed[i]);
        ++used;
    }
    if (used > 0) metrics.mape = ape / static_cast<double>(used) * 100.0;
    return metrics;
}

} // namespace unicrop::evaluate
