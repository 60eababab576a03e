#include "unicrop/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "unicrop/core/error.hpp"
#include "unicrop/core/stats.hpp"

namespace unicrop::preprocess {

namespace {

constexpr double kSpreadFloor = 1e-12;

// Solves the dense symmetric system A x = b by Gaussian elimination with
// partial pivoting. A is ridge-regularised upstream, so it is well posed.
std::vector<double> solve_linear(std::vector<std::vector<double>> a, std::vector<double> b) {
    const size_t n = b.size();
    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        for (size_t row = col + 1; row < n; ++row) {
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        }
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        const double diag = a[col][col];
        if (std::abs(diag) < 1e-300) continue; // degenerate direction, weight stays 0
        for (size_t row = col + 1; row < n; ++row) {
            const double factor = a[row][col] / diag;
            if (factor == 0.0) continue;
            for (size_t k = col; k < n; ++k) a[row][k] -= factor * a[col][k];
            b[row] -= factor * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (size_t i = n; i-- > 0;) {
        double sum = b[i];
        for (size_t k = i + 1; k < n; ++k) sum -= a[i][k] * x[k];
        x[i] = std::abs(a[i][i]) < 1e-300 ? 0.0 : sum / a[i][i];
    }
    return x;
}

// Ridge fit of y on the given predictor columns plus an unpenalised
// intercept; returns weights then intercept.
std::vector<double> ridge_fit(const std::vector<const std::vector<double>*>& predictors,
                              const std::vector<double>& y, double ridge) {
    const size_t p = predictors.size();
    const size_t n = y.size();
    const size_t dim = p + 1;
    std::vector<std::vector<double>> gram(dim, std::vector<double>(dim, 0.0));
    std::vector<double> moment(dim, 0.0);
    for (size_t row = 0; row < n; ++row) {
        for (size_t i = 0; i <= p; ++i) {
            const double xi = i < p ? (*predictors[i])[row] : 1.0;
            moment[i] += xi * y[row];
            for (size_t j = i; j <= p; ++j) {
                const double xj = j < p ? (*predictors[j])[row] : 1.0;
                gram[i][j] += xi * xj;
            }
        }
    }
    for (size_t i = 0; i < dim; ++i) {
        for (size_t j = 0; j < i; ++j) gram[i][j] = gram[j][i];
    }
    for (size_t i = 0; i < p; ++i) gram[i][i] += ridge; // intercept unpenalised
    return solve_linear(std::move(gram), std::move(moment));
}

double median_or_zero(const std::vector<double>& values) {
    return values.empty() ? 0.0 : stats::median(values);
}

} // namespace

WinsorBounds fit_winsor_bounds(const std::vector<double>& train_values, double level) {
    WinsorBounds bounds;
    bounds.lower = stats::percentile(train_values, level);
    bounds.upper = stats::percentile(train_values, 1.0 - level);
    return bounds;
}

double winsorize_value(double value, const WinsorBounds& bounds) {
    return std::clamp(value, bounds.lower, bounds.upper);
}

RobustScale fit_robust_scale(const std::vector<double>& train_values) {
    RobustScale scale;
    scale.centre = median_or_zero(train_values);
    const double iqr =
        stats::percentile(train_values, 0.75) - stats::percentile(train_values, 0.25);
    scale.spread = iqr < kSpreadFloor ? 1.0 : iqr;
    return scale;
}

double robust_scale_value(double value, const RobustScale& scale) {
    return (value - scale.centre) / scale.spread;
}

IterativeImputer IterativeImputer::fit(const CellBlock& train,
                                       const IterativeOptions& options) {
    IterativeImputer imputer;
    imputer.options_ = options;
    imputer.names_ = train.names;
    const size_t p = train.names.size();
    const size_t n = train.row_count();

    imputer.medians_.resize(p);
    imputer.iqrs_.resize(p);
    for (size_t c = 0; c < p; ++c) {
        const auto observed = stats::non_missing(train.columns[c]);
        imputer.medians_[c] = median_or_zero(observed);
        imputer.iqrs_[c] =
            stats::percentile(observed, 0.75) - stats::percentile(observed, 0.25);
    }

    if (p < 2 || n < 10) {
        imputer.median_fallback_ = true;
        return imputer;
    }

    // Working copy with medians filled in; originally-missing cells noted.
    std::vector<std::vector<double>> work(p, std::vector<double>(n));
    std::vector<std::vector<size_t>> missing_rows(p);
    for (size_t c = 0; c < p; ++c) {
        for (size_t r = 0; r < n; ++r) {
            if (train.columns[c][r].has_value()) {
                work[c][r] = *train.columns[c][r];
            } else {
                work[c][r] = imputer.medians_[c];
                missing_rows[c].push_back(r);
            }
        }
    }

    auto fit_column = [&](size_t c) {
        std::vector<const std::vector<double>*> predictors;
        predictors.reserve(p - 1);
        for (size_t other = 0; other < p; ++other) {
            if (other != c) predictors.push_back(&work[other]);
        }
        return ridge_fit(predictors, work[c], options.ridge);
    };
    auto predict_cell = [&](const std::vector<double>& weights, size_t c, size_t r) {
        double value = weights.back();
        size_t slot = 0;
        for (size_t other = 0; other < p; ++other) {
            if (other == c) continue;
            value += weights[slot++] * work[other][r];
        }
        return value;
    };

    for (size_t round = 0; round < options.max_rounds; ++round) {
        bool converged = true;
        bool any_update = false;
        for (size_t c = 0; c < p; ++c) {
            if (missing_rows[c].empty()) continue;
            const auto weights = fit_column(c);
            double max_change = 0.0;
            for (size_t r : missing_rows[c]) {
                const double updated = predict_cell(weights, c, r);
                max_change = std::max(max_change, std::abs(updated - work[c][r]));
                work[c][r] = updated;
            }
            any_update = true;
            if (max_change >= options.tolerance_scale * imputer.iqrs_[c]) converged = false;
        }
        imputer.rounds_used_ = round + 1;
        if (!any_update || converged) break;
    }

    // Models for every column, fit on the final imputed training block, are
    // what transform applies (validation may be missing where training was
    // not).
    imputer.coefficients_.resize(p);
    for (size_t c = 0; c < p; ++c) imputer.coefficients_[c] = fit_column(c);
    return imputer;
}

void IterativeImputer::transform_row(std::vector<Cell>& row) const {
    const size_t p = names_.size();
    std::vector<size_t> missing;
    std::vector<double> values(p);
    for (size_t c = 0; c < p; ++c) {
        if (row[c].has_value()) {
            values[c] = *row[c];
        } else {
            values[c] = medians_[c];
            missing.push_back(c);
        }
    }
    if (missing.empty()) return;

    if (!median_fallback_) {
        for (size_t round = 0; round < options_.max_rounds; ++round) {
            bool converged = true;
            for (size_t c : missing) {
                double updated = coefficients_[c].back();
                size_t slot = 0;
                for (size_t other = 0; other < p; ++other) {
                    if (other == c) continue;
                    updated += coefficients_[c][slot++] * values[other];
                }
                if (std::abs(updated - values[c]) >= options_.tolerance_scale * iqrs_[c]) {
                    converged = false;
                }
                values[c] = updated;
            }
            if (converged) break;
        }
    }
    for (size_t c : missing) row[c] = values[c];
}

KnnImputer KnnImputer::fit(const CellBlock& train, const std::vector<std::string>& train_groups,
                           const KnnOptions& options) {
    KnnImputer imputer;
    imputer.options_ = options;
    imputer.names_ = train.names;
    imputer.groups_ = train_groups;
    imputer.reference_raw_ = train.columns;

    const size_t p = train.names.size();
    imputer.medians_.resize(p);
    imputer.scales_.resize(p);
    imputer.reference_scaled_.resize(p);
    for (size_t c = 0; c < p; ++c) {
        const auto observed = stats::non_missing(train.columns[c]);
        imputer.medians_[c] = median_or_zero(observed);
        imputer.scales_[c] = fit_robust_scale(observed);
        auto& scaled = imputer.reference_scaled_[c];
        scaled.resize(train.columns[c].size());
        for (size_t r = 0; r < train.columns[c].size(); ++r) {
            if (train.columns[c][r].has_value()) {
                scaled[r] = robust_scale_value(*train.columns[c][r], imputer.scales_[c]);
            }
        }
    }
    return imputer;
}

void KnnImputer::transform_row(std::vector<Cell>& row, const std::string& group,
                               std::vector<std::string>* notes) const {
    const size_t p = names_.size();
    const size_t n_ref = reference_raw_.empty() ? 0 : reference_raw_.front().size();

    std::vector<Cell> scaled_row(p);
    for (size_t c = 0; c < p; ++c) {
        if (row[c].has_value()) scaled_row[c] = robust_scale_value(*row[c], scales_[c]);
    }

    for (size_t c = 0; c < p; ++c) {
        if (row[c].has_value()) continue;

        std::vector<size_t> pool;
        size_t in_group = 0;
        for (size_t r = 0; r < n_ref; ++r) {
            if (!reference_raw_[c][r].has_value()) continue;
            pool.push_back(r);
            if (groups_[r] == group) ++in_group;
        }
        const bool use_group = in_group >= options_.k + 1;

        struct Neighbour {
            double distance;
            size_t row;
        };
        std::vector<Neighbour> neighbours;
        for (size_t r : pool) {
            if (use_group && groups_[r] != group) continue;
            double sum = 0.0;
            size_t shared = 0;
            for (size_t other = 0; other < p; ++other) {
                if (!scaled_row[other].has_value() || !reference_scaled_[other][r].has_value()) {
                    continue;
                }
                const double d = *scaled_row[other] - *reference_scaled_[other][r];
                sum += d * d;
                ++shared;
            }
            if (shared == 0) continue;
            neighbours.push_back({std::sqrt(sum), r});
        }

        if (neighbours.empty()) {
            if (notes) {
                notes->push_back("NoUsableNeighbours: column '" + names_[c] +
                                 "' imputed with training median");
            }
            row[c] = medians_[c];
            continue;
        }
        std::sort(neighbours.begin(), neighbours.end(), [](const Neighbour& a, const Neighbour& b) {
            if (a.distance != b.distance) return a.distance < b.distance;
            return a.row < b.row; // distance ties break by row order
        });
        const size_t take = std::min(options_.k, neighbours.size());
        double sum = 0.0;
        for (size_t i = 0; i < take; ++i) sum += *reference_raw_[c][neighbours[i].row];
        row[c] = sum / static_cast<double>(take);
    }
}

std::uint64_t IterativeImputer::state_hash() const {
    std::uint64_t h = fnv1a64("iterative");
    h = fnv1a64_combine(h, median_fallback_ ? "fallback" : "fitted");
    h = fnv1a64_combine(h, std::to_string(rounds_used_));
    for (size_t c = 0; c < names_.size(); ++c) {
        h = fnv1a64_combine(h, names_[c]);
        h = fnv1a64_combine(h, format_exact(medians_[c]));
        h = fnv1a64_combine(h, format_exact(iqrs_[c]));
        if (c < coefficients_.size()) {
            for (double w : coefficients_[c]) h = fnv1a64_combine(h, format_exact(w));
        }
    }
    return h;
}

std::uint64_t KnnImputer::state_hash() const {
    std::uint64_t h = fnv1a64("knn");
    for (size_t c = 0; c < names_.size(); ++c) {
        h = fnv1a64_combine(h, names_[c]);
        h = fnv1a64_combine(h, format_exact(medians_[c]));
        h = fnv1a64_combine(h, format_exact(scales_[c].centre));
        h = fnv1a64_combine(h, format_exact(scales_[c].spread));
        for (const Cell& cell : reference_raw_[c]) {
            h = fnv1a64_combine(h, cell.has_value() ? format_exact(*cell) : "~");
        }
    }
    for (const auto& group : groups_) h = fnv1a64_combine(h, group);
    return h;
}

MedianImputer MedianImputer::fit(const CellBlock& train) {
    MedianImputer imputer;
    imputer.names = train.names;
    imputer.medians.resize(train.names.size());
    imputer.all_missing.resize(train.names.size());
    for (size_t c = 0; c < train.names.size(); ++c) {
        const auto observed = stats::non_missing(train.columns[c]);
        imputer.all_missing[c] = observed.empty();
        imputer.medians[c] = median_or_zero(observed);
    }
    return imputer;
}

void MedianImputer::transform_row(std::vector<Cell>& row) const {
    for (size_t c = 0; c < row.size(); ++c) {
        if (!row[c].has_value()) row[c] = medians[c];
    }
}

const char* imputer_kind_name(ImputerKind kind) {
    switch (kind) {
    case ImputerKind::iterative: return "iterative";
    case ImputerKind::knn: return "knn";
    case ImputerKind::median: return "median";
    }
    return "median";
}

FoldPreprocessor FoldPreprocessor::fit(const engineer::FieldMatrix& matrix,
                                       const std::vector<size_t>& train_rows,
                                       const PreprocessOptions& options) {
    FoldPreprocessor pre;
    pre.options_ = options;

    std::vector<size_t> candidate_columns;
    for (size_t c = 0; c < matrix.columns.size(); ++c) {
        if (matrix.columns[c].candidate) candidate_columns.push_back(c);
    }
    std::sort(candidate_columns.begin(), candidate_columns.end(), [&](size_t a, size_t b) {
        return matrix.columns[a].name < matrix.columns[b].name;
    });

    auto train_block = [&](const std::vector<size_t>& columns) {
        CellBlock block;
        for (size_t c : columns) {
            block.names.push_back(matrix.columns[c].name);
            std::vector<Cell> cells;
            cells.reserve(train_rows.size());
            for (size_t row : train_rows) cells.push_back(matrix.columns[c].values[row]);
            block.columns.push_back(std::move(cells));
        }
        return block;
    };

    std::vector<size_t> iterative_cols, knn_cols, median_cols;
    for (size_t c : candidate_columns) {
        switch (matrix.columns[c].family) {
        case Family::meteorology: iterative_cols.push_back(c); break;
        case Family::vegetation: knn_cols.push_back(c); break;
        default: median_cols.push_back(c); break;
        }
    }

    IterativeOptions iterative_options = options.iterative;
    bool iterative_ok = iterative_cols.size() >= 2 && train_rows.size() >= 10;
    if (!iterative_ok && !iterative_cols.empty()) {
        pre.warnings_.push_back(
            "TooFewColumns: meteorology iterative imputer needs >= 2 columns and >= 10 "
            "training rows; falling back to median imputation");
        for (size_t c : iterative_cols) median_cols.push_back(c);
        iterative_cols.clear();
        std::sort(median_cols.begin(), median_cols.end(), [&](size_t a, size_t b) {
            return matrix.columns[a].name < matrix.columns[b].name;
        });
    }

    if (!iterative_cols.empty()) {
        pre.iterative_ = IterativeImputer::fit(train_block(iterative_cols), iterative_options);
        pre.have_iterative_ = true;
    }
    if (!knn_cols.empty()) {
        std::vector<std::string> groups;
        groups.reserve(train_rows.size());
        for (size_t row : train_rows) {
            groups.push_back(matrix.district[row] + "|" + matrix.season[row]);
        }
        pre.knn_ = KnnImputer::fit(train_block(knn_cols), groups, {options.knn_k});
        pre.have_knn_ = true;
    }
    if (!median_cols.empty()) {
        pre.median_ = MedianImputer::fit(train_block(median_cols));
        for (size_t i = 0; i < pre.median_.names.size(); ++i) {
            if (pre.median_.all_missing[i]) {
                pre.warnings_.push_back("column '" + pre.median_.names[i] +
                                        "' has no training values; imputing 0");
            }
        }
    }

    // Column states in name order, each mapped to its imputer slot.
    for (size_t c : candidate_columns) {
        ColumnState state;
        state.name = matrix.columns[c].name;
        state.family = matrix.columns[c].family;
        if (std::find(iterative_cols.begin(), iterative_cols.end(), c) != iterative_cols.end()) {
            state.imputer = ImputerKind::iterative;
        } else if (std::find(knn_cols.begin(), knn_cols.end(), c) != knn_cols.end()) {
            state.imputer = ImputerKind::knn;
        } else {
            state.imputer = ImputerKind::median;
        }
        pre.columns_.push_back(std::move(state));
    }
    auto slot_of = [&](const std::vector<std::string>& names, const std::string& name) {
        return static_cast<size_t>(
            std::find(names.begin(), names.end(), name) - names.begin());
    };
    for (auto& state : pre.columns_) {
        switch (state.imputer) {
        case ImputerKind::iterative:
            pre.iterative_slots_.push_back(slot_of(pre.iterative_.names(), state.name));
            break;
        case ImputerKind::knn:
            pre.knn_slots_.push_back(slot_of(pre.knn_.names(), state.name));
            break;
        case ImputerKind::median:
            pre.median_slots_.push_back(slot_of(pre.median_.names, state.name));
            break;
        }
    }

    // Impute the training partition, then fit winsor bounds on it, then fit
    // the robust scaling on the winsorised values.
    std::vector<std::vector<double>> imputed_train(pre.columns_.size());
    for (size_t row : train_rows) {
        const auto imputed = pre.impute_row(matrix, row, nullptr);
        for (size_t c = 0; c < imputed.size(); ++c) imputed_train[c].push_back(imputed[c]);
    }
    for (size_t c = 0; c < pre.columns_.size(); ++c) {
        pre.columns_[c].winsor = fit_winsor_bounds(imputed_train[c], options.winsor_level);
        std::vector<double> clipped = imputed_train[c];
        for (double& value : clipped) value = winsorize_value(value, pre.columns_[c].winsor);
        pre.columns_[c].scale = fit_robust_scale(clipped);
    }
    return pre;
}

std::vector<double> FoldPreprocessor::impute_row(const engineer::FieldMatrix& matrix, size_t row,
                                                 std::vector<std::string>* notes) const {
    auto gather = [&](const std::vector<std::string>& names) {
        std::vector<Cell> cells;
        cells.reserve(names.size());
        for (const auto& name : names) {
            const auto index = matrix.column_index(name);
            if (!index.has_value()) {
                throw Error(Errc::schema_mismatch,
                            "fitted column '" + name + "' absent from the matrix");
            }
            cells.push_back(matrix.columns[*index].values[row]);
        }
        return cells;
    };

    std::vector<Cell> iterative_cells, knn_cells, median_cells;
    if (have_iterative_) {
        iterative_cells = gather(iterative_.names());
        iterative_.transform_row(iterative_cells);
    }
    if (have_knn_) {
        knn_cells = gather(knn_.names());
        knn_.transform_row(knn_cells, matrix.district[row] + "|" + matrix.season[row], notes);
    }
    if (!median_.names.empty()) {
        median_cells = gather(median_.names);
        median_.transform_row(median_cells);
    }

    std::vector<double> values(columns_.size(), 0.0);
    size_t iterative_i = 0, knn_i = 0, median_i = 0;
    for (size_t c = 0; c < columns_.size(); ++c) {
        Cell cell;
        switch (columns_[c].imputer) {
        case ImputerKind::iterative:
            cell = iterative_cells[iterative_slots_[iterative_i++]];
            break;
        case ImputerKind::knn:
            cell = knn_cells[knn_slots_[knn_i++]];
            break;
        case ImputerKind::median:
            cell = median_cells[median_slots_[median_i++]];
            break;
        }
        values[c] = cell.value_or(0.0);
    }
    return values;
}

FoldPreprocessor::Transformed FoldPreprocessor::apply(const engineer::FieldMatrix& matrix,
                                                      const std::vector<size_t>& rows) const {
    Transformed out;
    out.names.reserve(columns_.size());
    for (const auto& state : columns_) out.names.push_back(state.name);
    out.rows.reserve(rows.size());
    for (size_t row : rows) {
        auto values = impute_row(matrix, row, nullptr);
        for (size_t c = 0; c < columns_.size(); ++c) {
            values[c] = robust_scale_value(winsorize_value(values[c], columns_[c].winsor),
                                           columns_[c].scale);
        }
        out.rows.push_back(std::move(values));
    }
    return out;
}

std::string FoldPreprocessor::dump() const {
    std::ostringstream out;
    for (const auto& warning : warnings_) out << "warning " << warning << "\n";
    for (const auto& state : columns_) {
        out << "column=" << state.name << " family=" << family_name(state.family)
            << " imputer=" << imputer_kind_name(state.imputer)
            << " p1=" << format_exact(state.winsor.lower)
            << " p99=" << format_exact(state.winsor.upper)
            << " centre=" << format_exact(state.scale.centre)
            << " spread=" << format_exact(state.scale.spread) << "\n";
    }
    if (have_iterative_) {
        out << "iterative rounds=" << iterative_.rounds_used()
            << " fallback=" << (iterative_.median_fallback() ? 1 : 0) << "\n";
        for (size_t c = 0; c < iterative_.names().size(); ++c) {
            out << "iterative_median " << iterative_.names()[c] << "="
                << format_exact(iterative_.medians()[c]) << "\n";
        }
        out << "iterative_state_hash=" << to_hex(iterative_.state_hash()) << "\n";
    }
    if (have_knn_) {
        out << "knn k=" << options_.knn_k << "\n";
        for (size_t c = 0; c < knn_.names().size(); ++c) {
            out << "knn_median " << knn_.names()[c] << "=" << format_exact(knn_.medians()[c])
                << "\n";
        }
        out << "knn_reference_hash=" << to_hex(knn_.state_hash()) << "\n";
    }
    if (!median_.names.empty()) {
        for (size_t c = 0; c < median_.names.size(); ++c) {
            out << "median " << median_.names[c] << "=" << format_exact(median_.medians[c])
                << "\n";
        }
    }
    return out.str();
}

} // namespace unicrop::preprocess
