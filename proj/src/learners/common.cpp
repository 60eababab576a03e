#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "unicrop/core/error.hpp"
#include "unicrop/learners.hpp"

namespace unicrop::learners {

std::vector<size_t> schema_permutation(const std::vector<std::string>& fit_names,
                                       const Dataset& data) {
    if (data.names == fit_names) {
        std::vector<size_t> identity(fit_names.size());
        for (size_t i = 0; i < identity.size(); ++i) identity[i] = i;
        return identity;
    }
    if (data.names.size() != fit_names.size()) {
        throw Error(Errc::schema_mismatch,
                    "predict got " + std::to_string(data.names.size()) + " columns, fit saw " +
                        std::to_string(fit_names.size()));
    }
    std::unordered_map<std::string, size_t> index;
    for (size_t i = 0; i < data.names.size(); ++i) index.emplace(data.names[i], i);
    std::vector<size_t> permutation(fit_names.size());
    for (size_t i = 0; i < fit_names.size(); ++i) {
        const auto it = index.find(fit_names[i]);
        if (it == index.end()) {
            throw Error(Errc::schema_mismatch, "column '" + fit_names[i] + "' absent at predict");
        }
        permutation[i] = it->second;
    }
    return permutation;
}

void check_finite(const Dataset& data, const std::vector<double>& target) {
    if (data.row_count() != target.size()) {
        throw Error(Errc::length_mismatch, "X rows and y length differ");
    }
    for (const auto& row : data.rows) {
        if (row.size() != data.names.size()) {
            throw Error(Errc::schema_mismatch, "ragged design matrix row");
        }
        for (double value : row) {
            if (!std::isfinite(value)) throw Error(Errc::non_finite_input, "non-finite cell in X");
        }
    }
    for (double value : target) {
        if (!std::isfinite(value)) throw Error(Errc::non_finite_input, "non-finite target value");
    }
}

std::unique_ptr<Regressor> fit_elastic_net(const Dataset& data, const std::vector<double>& target,
                                           const ElasticNetOptions& options) {
    return std::make_unique<ElasticNet>(ElasticNet::fit(data, target, options));
}

std::unique_ptr<Regressor> fit_random_forest(const Dataset& data,
                                             const std::vector<double>& target,
                                             const RandomForestOptions& options,
                                             std::uint64_t seed) {
    return std::make_unique<RandomForest>(RandomForest::fit(data, target, options, seed));
}

std::unique_ptr<Regressor> fit_gradient_boosting(const Dataset& data,
                                                 const std::vector<double>& target,
                                                 const GradientBoostingOptions& options,
                                                 std::uint64_t seed) {
    return std::make_unique<GradientBoosting>(GradientBoosting::fit(data, target, options, seed));
}

std::unique_ptr<Regressor> fit_svr_rbf(const Dataset& data, const std::vector<double>& target,
                                       const SvrOptions& options, std::uint64_t seed,
                                       std::vector<std::string>* warnings) {
    return std::make_unique<SvrRbf>(SvrRbf::fit(data, target, options, seed, warnings));
}

} // namespace unicrop::learners
