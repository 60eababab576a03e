#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "internal.hpp"
#include "unicrop/core/rng.hpp"
#include "unicrop/learners.hpp"

namespace unicrop::learners {

RandomForest RandomForest::fit(const Dataset& data, const std::vector<double>& target,
                               const RandomForestOptions& options, std::uint64_t seed) {
    check_finite(data, target);
    RandomForest model;
    model.fit_names_ = data.names;
    const size_t n = data.row_count();
    const size_t p = data.column_count();
    if (n == 0 || options.trees == 0) return model;

    const auto columns = to_columns(data);
    const size_t mtry = options.mtry > 0
                            ? options.mtry
                            : static_cast<size_t>(std::ceil(static_cast<double>(p) / 3.0));

    RegressionTree::Options tree_options;
    tree_options.max_depth = 0;
    tree_options.min_leaf = options.min_leaf;
    tree_options.mtry = std::min(mtry, p);

    model.trees_.resize(options.trees);

    // Per-tree streams derive from (seed, tree index), so the forest is
    // identical no matter how trees are scheduled across threads.
    auto build_tree = [&](size_t t) {
        Rng rng(Rng::derive(seed, t));
        std::vector<size_t> rows(n);
        if (options.bootstrap) {
            for (size_t i = 0; i < n; ++i) rows[i] = rng.index(n);
        } else {
            std::iota(rows.begin(), rows.end(), size_t{0});
        }
        model.trees_[t].fit(columns, target, rows, tree_options, Rng::derive(seed, t ^ 0x9e37ULL));
    };

    const size_t workers =
        std::min<size_t>(options.trees, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (size_t t = 0; t < options.trees; ++t) build_tree(t);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const size_t t = next.fetch_add(1);
                    if (t >= options.trees) return;
                    build_tree(t);
                }
            });
        }
        for (auto& thread : pool) thread.join();
    }
    return model;
}

std::vector<double> RandomForest::predict(const Dataset& data) const {
    const auto permutation = schema_permutation(fit_names_, data);
    std::vector<double> out;
    out.reserve(data.row_count());
    std::vector<double> reordered(fit_names_.size());
    for (const auto& row : data.rows) {
        for (size_t j = 0; j < reordered.size(); ++j) reordered[j] = row[permutation[j]];
        double sum = 0.0;
        for (const auto& tree : trees_) sum += tree.predict_row(reordered.data());
        out.push_back(trees_.empty() ? 0.0 : sum / static_cast<double>(trees_.size()));
    }
    return out;
}

GradientBoosting GradientBoosting::fit(const Dataset& data, const std::vector<double>& target,
                                       const GradientBoostingOptions& options,
                                       std::uint64_t seed) {
    check_finite(data, target);
    GradientBoosting model;
    model.fit_names_ = data.names;
    model.learning_rate_ = options.learning_rate;
    const size_t n = data.row_count();
    if (n == 0) return model;

    double mean = 0.0;
    for (double v : target) mean += v;
    model.base_ = mean / static_cast<double>(n);
    if (options.rounds == 0) return model;

    const auto columns = to_columns(data);
    RegressionTree::Options tree_options;
    tree_options.max_depth = options.max_depth;
    tree_options.min_leaf = options.min_leaf;
    tree_options.mtry = 0;

    std::vector<double> current(n, model.base_);
    std::vector<double> residual(n);
    Rng rng(Rng::derive(seed, 0xb005));

    const size_t sample_size = std::max<size_t>(
        1, static_cast<size_t>(std::floor(options.subsample * static_cast<double>(n))));

    std::vector<double> row_buffer(data.column_count());
    for (size_t round = 0; round < options.rounds; ++round) {
        for (size_t i = 0; i < n; ++i) residual[i] = target[i] - current[i];

        std::vector<size_t> rows;
        if (sample_size >= n) {
            rows.resize(n);
            std::iota(rows.begin(), rows.end(), size_t{0});
        } else {
            rows = rng.sample_without_replacement(n, sample_size);
        }

        RegressionTree tree;
        tree.fit(columns, residual, rows, tree_options, Rng::derive(seed, round + 1));

        double mse = 0.0;
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = 0; j < row_buffer.size(); ++j) row_buffer[j] = columns[j][i];
            current[i] += options.learning_rate * tree.predict_row(row_buffer.data());
            const double err = target[i] - current[i];
            mse += err * err;
        }
        model.training_mse_.push_back(mse / static_cast<double>(n));
        model.trees_.push_back(std::move(tree));
    }
    return model;
}

std::vector<double> GradientBoosting::predict(const Dataset& data) const {
    const auto permutation = schema_permutation(fit_names_, data);
    std::vector<double> out;
    out.reserve(data.row_count());
    std::vector<double> reordered(fit_names_.size());
    for (const auto& row : data.rows) {
        for (size_t j = 0; j < reordered.size(); ++j) reordered[j] = row[permutation[j]];
        double value = base_;
        for (const auto& tree : trees_) {
            value += learning_rate_ * tree.predict_row(reordered.data());
        }
        out.push_back(value);
    }
    return out;
}

} // namespace unicrop::learners
