#include <algorithm>
#include <cmath>
#include <limits>

#include "unicrop/core/error.hpp"
#include "unicrop/evaluate.hpp"

namespace unicrop::evaluate {

namespace {

// Gaussian elimination with partial pivoting; returns false on a singular
// system (that subset is then skipped).
bool solve_system(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double>& x) {
    const size_t n = b.size();
    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        for (size_t row = col + 1; row < n; ++row) {
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        }
        if (std::abs(a[pivot][col]) < 1e-12) return false;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (size_t row = col + 1; row < n; ++row) {
            const double factor = a[row][col] / a[col][col];
            if (factor == 0.0) continue;
            for (size_t k = col; k < n; ++k) a[row][k] -= factor * a[col][k];
            b[row] -= factor * b[col];
        }
    }
    x.assign(n, 0.0);
    for (size_t i = n; i-- > 0;) {
        double sum = b[i];
        for (size_t k = i + 1; k < n; ++k) sum -= a[i][k] * x[k];
        x[i] = sum / a[i][i];
    }
    return true;
}

double objective_at(const std::vector<std::vector<double>>& predictions,
                    const std::vector<double>& target, const std::vector<double>& weights) {
    const size_t n = target.size();
    double sse = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double combined = 0.0;
        for (size_t m = 0; m < weights.size(); ++m) combined += weights[m] * predictions[m][i];
        const double err = target[i] - combined;
        sse += err * err;
    }
    return sse;
}

} // namespace

EnsembleWeights fit_ensemble_weights(const std::vector<std::vector<double>>& predictions,
                                     const std::vector<double>& target,
                                     const std::vector<std::string>& model_names) {
    const size_t m = predictions.size();
    if (m == 0) throw Error(Errc::no_models, "ensemble needs at least one prediction column");
    for (const auto& column : predictions) {
        if (column.size() != target.size()) {
            throw Error(Errc::length_mismatch, "prediction column length differs from target");
        }
    }

    // Gram matrix and moment vector of the full QP.
    std::vector<std::vector<double>> gram(m, std::vector<double>(m, 0.0));
    std::vector<double> moment(m, 0.0);
    for (size_t a = 0; a < m; ++a) {
        for (size_t b = a; b < m; ++b) {
            double sum = 0.0;
            for (size_t i = 0; i < target.size(); ++i) sum += predictions[a][i] * predictions[b][i];
            gram[a][b] = sum;
            gram[b][a] = sum;
        }
        for (size_t i = 0; i < target.size(); ++i) moment[a] += predictions[a][i] * target[i];
    }

    std::vector<double> best_weights;
    double best_objective = std::numeric_limits<double>::infinity();

    // Every subset of active (nonzero) models: solve the equality-
    // constrained problem on the face, keep the best feasible point.
    const size_t subsets = size_t{1} << m;
    for (size_t mask = 1; mask < subsets; ++mask) {
        std::vector<size_t> active;
        for (size_t i = 0; i < m; ++i) {
            if (mask & (size_t{1} << i)) active.push_back(i);
        }
        const size_t t = active.size();

        std::vector<double> solution;
        if (t == 1) {
            solution = {1.0};
        } else {
            // KKT system: [2G 1; 1' 0] [w; lambda] = [2q; 1]
            std::vector<std::vector<double>> sys(t + 1, std::vector<double>(t + 1, 0.0));
            std::vector<double> rhs(t + 1, 0.0);
            for (size_t a = 0; a < t; ++a) {
                for (size_t b = 0; b < t; ++b) sys[a][b] = 2.0 * gram[active[a]][active[b]];
                sys[a][t] = 1.0;
                sys[t][a] = 1.0;
                rhs[a] = 2.0 * moment[active[a]];
            }
            rhs[t] = 1.0;
            std::vector<double> x;
            if (!solve_system(std::move(sys), std::move(rhs), x)) continue;
            solution.assign(x.begin(), x.begin() + static_cast<long>(t));
        }

        bool feasible = true;
        for (double w : solution) {
            if (w < -1e-12) {
                feasible = false;
                break;
            }
        }
        if (!feasible) continue;

        std::vector<double> weights(m, 0.0);
        for (size_t a = 0; a < t; ++a) weights[active[a]] = std::max(0.0, solution[a]);
        double total = 0.0;
        for (double w : weights) total += w;
        if (total <= 0.0) continue;
        for (double& w : weights) w /= total;

        const double objective = objective_at(predictions, target, weights);
        if (objective < best_objective) {
            best_objective = objective;
            best_weights = std::move(weights);
        }
    }

    EnsembleWeights result;
    result.models = model_names;
    result.weights = std::move(best_weights);
    result.objective = best_objective;
    return result;
}

} // namespace unicrop::evaluate
