#include <algorithm>
#include <cmath>
#include <limits>

#include "internal.hpp"
#include "unicrop/core/error.hpp"
#include "unicrop/core/rng.hpp"
#include "unicrop/learners.hpp"

namespace unicrop::learners {

namespace {

constexpr size_t kHardPassCap = 2000;

double rbf(const std::vector<double>& a, const std::vector<double>& b, double gamma) {
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::exp(-gamma * sum);
}

// Dual objective 0.5*b'Kb - y'b + eps*|b|_1 for the beta parameterisation.
double objective_value(const std::vector<std::vector<double>>& kernel,
                       const std::vector<double>& beta, const std::vector<double>& target,
                       double epsilon) {
    const size_t n = beta.size();
    double quad = 0.0, lin = 0.0, l1 = 0.0;
    for (size_t i = 0; i < n; ++i) {
        if (beta[i] == 0.0) {
            continue;
        }
        double k_row = 0.0;
        for (size_t j = 0; j < n; ++j) k_row += kernel[i][j] * beta[j];
        quad += beta[i] * k_row;
        lin += target[i] * beta[i];
        l1 += std::abs(beta[i]);
    }
    return 0.5 * quad - lin + epsilon * l1;
}

} // namespace

SvrRbf SvrRbf::fit(const Dataset& data, const std::vector<double>& target,
                   const SvrOptions& options, std::uint64_t seed,
                   std::vector<std::string>* warnings) {
    check_finite(data, target);
    SvrRbf model;
    model.fit_names_ = data.names;
    model.epsilon_ = options.epsilon;
    model.cost_ = options.cost;

    const size_t n = data.row_count();
    const size_t p = data.column_count();
    if (n == 0) return model;

    double gamma = options.gamma;
    if (gamma <= 0.0) {
        // 1 / (p * var(X)) with the variance over every matrix entry.
        double mean = 0.0;
        for (const auto& row : data.rows) {
            for (double v : row) mean += v;
        }
        const double count = static_cast<double>(n * std::max<size_t>(p, 1));
        mean /= count;
        double variance = 0.0;
        for (const auto& row : data.rows) {
            for (double v : row) variance += (v - mean) * (v - mean);
        }
        variance /= count;
        gamma = variance > 0.0 ? 1.0 / (static_cast<double>(p) * variance)
                               : 1.0 / static_cast<double>(std::max<size_t>(p, 1));
    }
    model.gamma_ = gamma;

    std::vector<std::vector<double>> kernel(n, std::vector<double>(n));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i; j < n; ++j) {
            const double k = rbf(data.rows[i], data.rows[j], gamma);
            kernel[i][j] = k;
            kernel[j][i] = k;
        }
    }

    std::vector<double> beta(n, 0.0);
    std::vector<double> gradient(n, 0.0); // K @ beta, maintained incrementally
    const double c = options.cost;
    const double eps = options.epsilon;
    Rng rng(Rng::derive(seed, 0x5e9));

    // One pairwise step: move t along (beta_i += t, beta_j -= t), solving
    // the piecewise quadratic exactly within the box.
    auto pair_step = [&](size_t i, size_t j) -> double {
        const double eta = kernel[i][i] + kernel[j][j] - 2.0 * kernel[i][j];
        const double slope = (gradient[i] - target[i]) - (gradient[j] - target[j]);
        const double t_lo = std::max(-c - beta[i], beta[j] - c);
        const double t_hi = std::min(c - beta[i], beta[j] + c);
        if (t_lo >= t_hi) return 0.0;

        auto value_at = [&](double t) {
            return 0.5 * eta * t * t + slope * t +
                   eps * (std::abs(beta[i] + t) + std::abs(beta[j] - t) - std::abs(beta[i]) -
                          std::abs(beta[j]));
        };

        double best_t = 0.0;
        double best_value = 0.0; // value_at(0) == 0
        auto consider = [&](double t) {
            if (t < t_lo || t > t_hi) return;
            const double v = value_at(t);
            if (v < best_value - 1e-15) {
                best_value = v;
                best_t = t;
            }
        };
        if (eta > 0.0) {
            for (double si : {-1.0, 1.0}) {
                for (double sj : {-1.0, 1.0}) {
                    consider(-(slope + eps * si - eps * sj) / eta);
                }
            }
        }
        consider(-beta[i]);
        consider(beta[j]);
        consider(t_lo);
        consider(t_hi);
        if (best_t == 0.0) return 0.0;

        beta[i] += best_t;
        beta[j] -= best_t;
        for (size_t k = 0; k < n; ++k) {
            gradient[k] += best_t * (kernel[i][k] - kernel[j][k]);
        }
        return best_t;
    };

    const double update_floor = 1e-8 * c;
    size_t clean_passes = 0;
    size_t total_passes = 0;
    bool converged = false;
    while (total_passes < kHardPassCap) {
        ++total_passes;
        size_t updates = 0;
        for (size_t i = 0; i < n; ++i) {
            size_t j = rng.index(n - 1);
            if (j >= i) ++j;
            if (std::abs(pair_step(i, j)) > update_floor) ++updates;
        }
        if (updates == 0) {
            if (++clean_passes >= options.max_passes) {
                converged = true;
                break;
            }
        } else {
            clean_passes = 0;
        }
    }
    if (!converged && warnings) {
        warnings->push_back("NonConvergence: SVR stopped after " + std::to_string(total_passes) +
                            " passes; returning best iterate");
    }

    // Bias from the KKT intervals; strict interior points pin it exactly.
    double sum_b = 0.0;
    size_t count_b = 0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n; ++i) {
        const double base = target[i] - gradient[i];
        if (beta[i] > 0.0 && beta[i] < c) {
            sum_b += base - eps;
            ++count_b;
        } else if (beta[i] < 0.0 && beta[i] > -c) {
            sum_b += base + eps;
            ++count_b;
        } else if (beta[i] == 0.0) {
            lo = std::max(lo, base - eps);
            hi = std::min(hi, base + eps);
        } else if (beta[i] >= c) {
            hi = std::min(hi, base - eps);
        } else { // beta[i] <= -c
            lo = std::max(lo, base + eps);
        }
    }
    if (count_b > 0) {
        model.bias_ = sum_b / static_cast<double>(count_b);
    } else if (std::isfinite(lo) && std::isfinite(hi)) {
        model.bias_ = (lo + hi) / 2.0;
    } else if (std::isfinite(lo)) {
        model.bias_ = lo;
    } else if (std::isfinite(hi)) {
        model.bias_ = hi;
    }

    for (size_t i = 0; i < n; ++i) {
        if (beta[i] != 0.0) {
            model.support_rows_.push_back(data.rows[i]);
            model.beta_.push_back(beta[i]);
        }
    }
    return model;
}

std::vector<double> SvrRbf::predict(const Dataset& data) const {
    const auto permutation = schema_permutation(fit_names_, data);
    std::vector<double> out;
    out.reserve(data.row_count());
    std::vector<double> reordered(fit_names_.size());
    for (const auto& row : data.rows) {
        for (size_t j = 0; j < reordered.size(); ++j) reordered[j] = row[permutation[j]];
        double value = bias_;
        for (size_t s = 0; s < support_rows_.size(); ++s) {
            value += beta_[s] * rbf(support_rows_[s], reordered, gamma_);
        }
        out.push_back(value);
    }
    return out;
}

double SvrRbf::dual_objective(const Dataset& data, const std::vector<double>& target) const {
    // Rebuilds the dual over the fitted support set against the original
    // training data (test hook; assumes `data` is the fit-time matrix).
    const size_t n = data.row_count();
    std::vector<double> beta_full(n, 0.0);
    size_t cursor = 0;
    for (size_t i = 0; i < n && cursor < support_rows_.size(); ++i) {
        if (data.rows[i] == support_rows_[cursor]) {
            beta_full[i] = beta_[cursor];
            ++cursor;
        }
    }
    std::vector<std::vector<double>> kernel(n, std::vector<double>(n));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i; j < n; ++j) {
            const double k = rbf(data.rows[i], data.rows[j], gamma_);
            kernel[i][j] = k;
            kernel[j][i] = k;
        }
    }
    return objective_value(kernel, beta_full, target, epsilon_);
}

} // namespace unicrop::learners
