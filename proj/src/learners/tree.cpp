#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "internal.hpp"
#include "unicrop/core/rng.hpp"
#include "unicrop/learners.hpp"

namespace unicrop::learners {

// Thin wrapper so the header does not expose the core Rng type.
class TreeRng {
  public:
    explicit TreeRng(std::uint64_t seed) : rng_(seed) {}
    Rng& get() { return rng_; }

  private:
    Rng rng_;
};

namespace {

struct SplitChoice {
    bool found = false;
    size_t feature = 0;
    double threshold = 0.0;
    double gain = -std::numeric_limits<double>::infinity();
};

// Best exact split over the given features: maximises the variance
// reduction  sum_L^2/n_L + sum_R^2/n_R  with both children >= min_leaf.
// Features ascend and thresholds ascend, so equal gains resolve the same
// way on every platform.
SplitChoice best_split(const std::vector<std::vector<double>>& columns,
                       const std::vector<double>& target, const std::vector<size_t>& rows,
                       size_t begin, size_t end, const std::vector<size_t>& features,
                       size_t min_leaf) {
    const size_t m = end - begin;
    SplitChoice best;

    std::vector<size_t> order(m);
    std::vector<double> prefix_sum(m + 1, 0.0);

    for (size_t feature : features) {
        const auto& column = columns[feature];
        for (size_t i = 0; i < m; ++i) order[i] = rows[begin + i];
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            if (column[a] != column[b]) return column[a] < column[b];
            return a < b;
        });
        for (size_t i = 0; i < m; ++i) prefix_sum[i + 1] = prefix_sum[i] + target[order[i]];
        const double total = prefix_sum[m];

        for (size_t i = min_leaf; i + min_leaf <= m; ++i) {
            if (column[order[i - 1]] == column[order[i]]) continue; // not a boundary
            const double left_sum = prefix_sum[i];
            const double right_sum = total - left_sum;
            const double gain = left_sum * left_sum / static_cast<double>(i) +
                                right_sum * right_sum / static_cast<double>(m - i);
            if (gain > best.gain) {
                best.found = true;
                best.feature = feature;
                best.threshold = (column[order[i - 1]] + column[order[i]]) / 2.0;
                // Guard against midpoints collapsing onto the left value for
                // adjacent doubles.
                if (best.threshold <= column[order[i - 1]]) best.threshold = column[order[i]];
                best.gain = gain;
            }
        }
    }
    return best;
}

} // namespace

void RegressionTree::fit(const std::vector<std::vector<double>>& columns,
                         const std::vector<double>& target, const std::vector<size_t>& rows,
                         const Options& options, std::uint64_t seed) {
    nodes_.clear();
    std::vector<size_t> work = rows;
    TreeRng rng(seed);
    build(columns, target, work, 0, work.size(), 0, options, rng);
}

size_t RegressionTree::build(const std::vector<std::vector<double>>& columns,
                             const std::vector<double>& target, std::vector<size_t>& rows,
                             size_t begin, size_t end, size_t depth, const Options& options,
                             TreeRng& rng) {
    const size_t index = nodes_.size();
    nodes_.push_back(Node{});

    const size_t m = end - begin;
    double sum = 0.0;
    for (size_t i = begin; i < end; ++i) sum += target[rows[i]];
    const double mean = m > 0 ? sum / static_cast<double>(m) : 0.0;
    nodes_[index].value = mean;

    const bool depth_capped = options.max_depth > 0 && depth >= options.max_depth;
    if (m < 2 * std::max<size_t>(options.min_leaf, 1) || depth_capped) return index;

    // mtry feature subset, ascending for deterministic tie resolution.
    std::vector<size_t> features;
    const size_t p = columns.size();
    if (options.mtry == 0 || options.mtry >= p) {
        features.resize(p);
        std::iota(features.begin(), features.end(), size_t{0});
    } else {
        features = rng.get().sample_without_replacement(p, options.mtry);
    }

    const SplitChoice split = best_split(columns, target, rows, begin, end, features,
                                         std::max<size_t>(options.min_leaf, 1));
    if (!split.found) return index;

    const auto middle = std::stable_partition(
        rows.begin() + static_cast<long>(begin), rows.begin() + static_cast<long>(end),
        [&](size_t row) { return columns[split.feature][row] < split.threshold; });
    const size_t cut = static_cast<size_t>(middle - rows.begin());
    if (cut == begin || cut == end) return index; // degenerate partition

    nodes_[index].leaf = false;
    nodes_[index].feature = split.feature;
    nodes_[index].threshold = split.threshold;
    const size_t left = build(columns, target, rows, begin, cut, depth + 1, options, rng);
    const size_t right = build(columns, target, rows, cut, end, depth + 1, options, rng);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
}

double RegressionTree::predict_row(const double* values) const {
    size_t index = 0;
    while (!nodes_[index].leaf) {
        index = values[nodes_[index].feature] < nodes_[index].threshold ? nodes_[index].left
                                                                        : nodes_[index].right;
    }
    return nodes_[index].value;
}

} // namespace unicrop::learners
