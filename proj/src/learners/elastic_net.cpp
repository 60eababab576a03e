#include <algorithm>
#include <cmath>

#include "internal.hpp"
#include "unicrop/core/error.hpp"
#include "unicrop/learners.hpp"

namespace unicrop::learners {

namespace {

double soft_threshold(double value, double threshold) {
    if (value > threshold) return value - threshold;
    if (value < -threshold) return value + threshold;
    return 0.0;
}

} // namespace

ElasticNet ElasticNet::fit(const Dataset& data, const std::vector<double>& target,
                           const ElasticNetOptions& options) {
    check_finite(data, target);
    const size_t n = data.row_count();
    const size_t p = data.column_count();

    ElasticNet model;
    model.fit_names_ = data.names;
    model.options_ = options;
    model.weights_.assign(p, 0.0);
    if (n == 0) return model;

    const auto columns = to_columns(data);
    std::vector<double> col_sq(p, 0.0);
    for (size_t j = 0; j < p; ++j) {
        for (double v : columns[j]) col_sq[j] += v * v;
        col_sq[j] /= static_cast<double>(n);
    }

    double intercept = 0.0;
    for (double v : target) intercept += v;
    intercept /= static_cast<double>(n);

    std::vector<double> residual(n);
    for (size_t i = 0; i < n; ++i) residual[i] = target[i] - intercept;

    const double l1_penalty = options.alpha * options.l1_ratio;
    const double l2_penalty = options.alpha * (1.0 - options.l1_ratio);

    for (size_t sweep = 0; sweep < options.max_iter; ++sweep) {
        double max_update = 0.0;

        // Intercept first so constant columns stay at zero weight.
        double mean_residual = 0.0;
        for (double r : residual) mean_residual += r;
        mean_residual /= static_cast<double>(n);
        if (mean_residual != 0.0) {
            intercept += mean_residual;
            for (double& r : residual) r -= mean_residual;
            max_update = std::abs(mean_residual);
        }

        for (size_t j = 0; j < p; ++j) {
            if (col_sq[j] == 0.0) continue;
            double rho = 0.0;
            for (size_t i = 0; i < n; ++i) rho += columns[j][i] * residual[i];
            rho = rho / static_cast<double>(n) + col_sq[j] * model.weights_[j];
            const double updated = soft_threshold(rho, l1_penalty) / (col_sq[j] + l2_penalty);
            const double delta = updated - model.weights_[j];
            if (delta != 0.0) {
                for (size_t i = 0; i < n; ++i) residual[i] -= columns[j][i] * delta;
                model.weights_[j] = updated;
                max_update = std::max(max_update, std::abs(delta));
            }
        }
        if (max_update < options.tol) break;
    }
    model.intercept_ = intercept;
    return model;
}

std::vector<double> ElasticNet::predict(const Dataset& data) const {
    const auto permutation = schema_permutation(fit_names_, data);
    std::vector<double> out;
    out.reserve(data.row_count());
    for (const auto& row : data.rows) {
        double value = intercept_;
        for (size_t j = 0; j < weights_.size(); ++j) value += weights_[j] * row[permutation[j]];
        out.push_back(value);
    }
    return out;
}

double ElasticNet::kkt_violation(const Dataset& data, const std::vector<double>& target) const {
    const auto permutation = schema_permutation(fit_names_, data);
    const size_t n = data.row_count();
    std::vector<double> residual(n);
    for (size_t i = 0; i < n; ++i) {
        double value = intercept_;
        for (size_t j = 0; j < weights_.size(); ++j) {
            value += weights_[j] * data.rows[i][permutation[j]];
        }
        residual[i] = target[i] - value;
    }
    const double l1_penalty = options_.alpha * options_.l1_ratio;
    const double l2_penalty = options_.alpha * (1.0 - options_.l1_ratio);

    double worst = 0.0;
    for (size_t j = 0; j < weights_.size(); ++j) {
        double gradient = 0.0;
        for (size_t i = 0; i < n; ++i) gradient -= data.rows[i][permutation[j]] * residual[i];
        gradient = gradient / static_cast<double>(n) + l2_penalty * weights_[j];
        double violation;
        if (weights_[j] > 0.0) violation = std::abs(gradient + l1_penalty);
        else if (weights_[j] < 0.0) violation = std::abs(gradient - l1_penalty);
        else violation = std::max(0.0, std::abs(gradient) - l1_penalty);
        worst = std::max(worst, violation);
    }
    double mean_residual = 0.0;
    for (double r : residual) mean_residual += r;
    worst = std::max(worst, std::abs(mean_residual / static_cast<double>(std::max<size_t>(n, 1))));
    return worst;
}

} // namespace unicrop::learners
