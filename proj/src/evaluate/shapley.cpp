#include <algorithm>
#include <cmath>

#include "unicrop/core/error.hpp"
#include "unicrop/core/rng.hpp"
#include "unicrop/evaluate.hpp"

namespace unicrop::evaluate {

namespace {

constexpr size_t kExactLimit = 12;
constexpr size_t kSampledMinBudget = 100;

// v(T) for one explained row across every subset mask: model evaluated on
// composites (explained features inside T, background otherwise), averaged
// over background rows. One batched predict call per explained row.
std::vector<double> subset_values(const learners::Regressor& model,
                                  const std::vector<std::string>& names,
                                  const std::vector<double>& row,
                                  const std::vector<std::vector<double>>& background) {
    const size_t p = names.size();
    const size_t masks = size_t{1} << p;

    learners::Dataset batch;
    batch.names = names;
    batch.rows.reserve(masks * background.size());
    for (size_t mask = 0; mask < masks; ++mask) {
        for (const auto& bg : background) {
            std::vector<double> composite(p);
            for (size_t j = 0; j < p; ++j) {
                composite[j] = (mask & (size_t{1} << j)) ? row[j] : bg[j];
            }
            batch.rows.push_back(std::move(composite));
        }
    }
    const auto predictions = model.predict(batch);

    std::vector<double> values(masks, 0.0);
    const double bg_count = static_cast<double>(background.size());
    for (size_t mask = 0; mask < masks; ++mask) {
        double sum = 0.0;
        for (size_t b = 0; b < background.size(); ++b) {
            sum += predictions[mask * background.size() + b];
        }
        values[mask] = sum / bg_count;
    }
    return values;
}

} // namespace

ShapleyAttribution shapley_importance(const learners::Regressor& model,
                                      const learners::Dataset& explain,
                                      const std::vector<std::vector<double>>& background,
                                      const ShapleyOptions& options) {
    const size_t p = explain.column_count();
    if (background.empty()) {
        throw Error(Errc::length_mismatch, "Shapley needs at least one background row");
    }
    for (const auto& bg : background) {
        if (bg.size() != p) {
            throw Error(Errc::schema_mismatch, "background row width differs from explain width");
        }
    }
    if (options.mode == ShapleyMode::exact && p > kExactLimit) {
        throw Error(Errc::too_many_features_for_exact,
                    "exact enumeration supports at most " + std::to_string(kExactLimit) +
                        " features, got " + std::to_string(p));
    }
    if (options.mode == ShapleyMode::sampled && options.budget < kSampledMinBudget) {
        throw Error(Errc::config_error, "sampled Shapley needs a budget of at least " +
                                            std::to_string(kSampledMinBudget) + " permutations");
    }

    ShapleyAttribution attribution;
    attribution.features = explain.names;
    attribution.phi.assign(explain.row_count(), std::vector<double>(p, 0.0));
    attribution.base.resize(explain.row_count());
    attribution.prediction.resize(explain.row_count());
    attribution.mean_abs_phi.assign(p, 0.0);

    if (options.mode == ShapleyMode::exact) {
        // Shapley kernel weights |T|! (p-|T|-1)! / p!
        std::vector<double> weight_by_size(p, 0.0);
        {
            std::vector<double> factorial(p + 1, 1.0);
            for (size_t i = 1; i <= p; ++i) factorial[i] = factorial[i - 1] * static_cast<double>(i);
            for (size_t t = 0; t < p; ++t) {
                weight_by_size[t] = factorial[t] * factorial[p - 1 - t] / factorial[p];
            }
        }
        const size_t masks = size_t{1} << p;
        for (size_t r = 0; r < explain.row_count(); ++r) {
            const auto values =
                subset_values(model, explain.names, explain.rows[r], background);
            attribution.base[r] = values[0];
            attribution.prediction[r] = values[masks - 1];
            for (size_t j = 0; j < p; ++j) {
                const size_t bit = size_t{1} << j;
                double phi = 0.0;
                for (size_t mask = 0; mask < masks; ++mask) {
                    if (mask & bit) continue;
                    const size_t size = static_cast<size_t>(__builtin_popcountll(mask));
                    phi += weight_by_size[size] * (values[mask | bit] - values[mask]);
                }
                attribution.phi[r][j] = phi;
            }
        }
    } else {
        Rng rng(options.seed);
        std::vector<size_t> permutation(p);
        for (size_t r = 0; r < explain.row_count(); ++r) {
            const auto& row = explain.rows[r];

            // Walk each permutation through one batched predict: p+1
            // composites per permutation, background first.
            learners::Dataset batch;
            batch.names = explain.names;
            batch.rows.reserve(options.budget * (p + 1) * background.size());
            std::vector<std::vector<size_t>> orders(options.budget);
            for (size_t perm = 0; perm < options.budget; ++perm) {
                for (size_t j = 0; j < p; ++j) permutation[j] = j;
                rng.shuffle(permutation);
                orders[perm] = permutation;
                for (const auto& bg : background) {
                    std::vector<double> composite = bg;
                    batch.rows.push_back(composite);
                }
                std::vector<bool> included(p, false);
                for (size_t step = 0; step < p; ++step) {
                    included[permutation[step]] = true;
                    for (const auto& bg : background) {
                        std::vector<double> composite(p);
                        for (size_t j = 0; j < p; ++j) composite[j] = included[j] ? row[j] : bg[j];
                        batch.rows.push_back(std::move(composite));
                    }
                }
            }
            const auto predictions = model.predict(batch);
            const size_t stride = (p + 1) * background.size();
            const double bg_count = static_cast<double>(background.size());

            auto value_at = [&](size_t perm, size_t step) {
                double sum = 0.0;
                for (size_t b = 0; b < background.size(); ++b) {
                    sum += predictions[perm * stride + step * background.size() + b];
                }
                return sum / bg_count;
            };

            double base_sum = 0.0;
            double full_sum = 0.0;
            for (size_t perm = 0; perm < options.budget; ++perm) {
                double previous = value_at(perm, 0);
                base_sum += previous;
                for (size_t step = 0; step < p; ++step) {
                    const double next = value_at(perm, step + 1);
                    attribution.phi[r][orders[perm][step]] += next - previous;
                    previous = next;
                }
                full_sum += previous;
            }
            const double budget = static_cast<double>(options.budget);
            for (size_t j = 0; j < p; ++j) attribution.phi[r][j] /= budget;
            attribution.base[r] = base_sum / budget;
            attribution.prediction[r] = full_sum / budget;
        }
    }

    for (size_t j = 0; j < p; ++j) {
        double sum = 0.0;
        for (size_t r = 0; r < explain.row_count(); ++r) {
            sum += std::abs(attribution.phi[r][j]);
        }
        attribution.mean_abs_phi[j] =
            explain.row_count() > 0 ? sum / static_cast<double>(explain.row_count()) : 0.0;
    }
    return attribution;
}

} // namespace unicrop::evaluate
