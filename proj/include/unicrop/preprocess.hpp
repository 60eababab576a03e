#pragma once

#include <string>
#include <vector>

#include "unicrop/core/family.hpp"
#include "unicrop/core/numeric.hpp"
#include "unicrop/engineer.hpp"

namespace unicrop::preprocess {

// Column-major block of named cells; the unit the family imputers work on.
struct CellBlock {
    std::vector<std::string> names;
    std::vector<std::vector<Cell>> columns; // [column][row]

    size_t row_count() const { return columns.empty() ? 0 : columns.front().size(); }
};

struct WinsorBounds {
    double lower = 0.0;
    double upper = 0.0;
};

// Bounds from training rows with linear-interpolation percentiles at
// [level, 1 - level]; default level 0.01.
WinsorBounds fit_winsor_bounds(const std::vector<double>& train_values, double level = 0.01);
double winsorize_value(double value, const WinsorBounds& bounds);

struct RobustScale {
    double centre = 0.0;
    double spread = 1.0; // divisor; IQR below 1e-12 degrades to 1
};

RobustScale fit_robust_scale(const std::vector<double>& train_values);
double robust_scale_value(double value, const RobustScale& scale);

// Chained-equations imputer for meteorology columns: median initialisation,
// up to 10 rounds of per-column ridge regressions (ridge 1e-3) on the other
// columns, early stop when the largest imputed-cell change drops below
// 1e-4 x column IQR. Fitted coefficients are retained for transform.
struct IterativeOptions {
    size_t max_rounds = 10;
    double ridge = 1e-3;
    double tolerance_scale = 1e-4;
};

class IterativeImputer {
  public:
    static IterativeImputer fit(const CellBlock& train,
                                const IterativeOptions& options = IterativeOptions());

    // Fills missing cells of one row (cells ordered as the fitted columns).
    void transform_row(std::vector<Cell>& row) const;

    bool median_fallback() const { return median_fallback_; }
    size_t rounds_used() const { return rounds_used_; }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<double>& medians() const { return medians_; }

    // Content hash over every fitted parameter, for state-identity checks.
    std::uint64_t state_hash() const;

  private:
    std::vector<std::string> names_;
    std::vector<double> medians_;
    std::vector<double> iqrs_;
    std::vector<std::vector<double>> coefficients_; // [column][p-1 weights + intercept]
    IterativeOptions options_;
    size_t rounds_used_ = 0;
    bool median_fallback_ = false;
};

// K-nearest-neighbour imputer for vegetation columns with district-season
// grouping. Distances are Euclidean over mutually non-missing columns on
// robust-scaled copies; groups with fewer than k+1 usable rows fall back to
// the global training pool, and rows with no usable neighbours fall back to
// the training median.
struct KnnOptions {
    size_t k = 5;
};

class KnnImputer {
  public:
    static KnnImputer fit(const CellBlock& train, const std::vector<std::string>& train_groups,
                          const KnnOptions& options = KnnOptions());

    void transform_row(std::vector<Cell>& row, const std::string& group,
                       std::vector<std::string>* notes = nullptr) const;

    const std::vector<std::string>& names() const { return names_; }
    const std::vector<double>& medians() const { return medians_; }

    // Content hash over scales, medians and the neighbour reference block.
    std::uint64_t state_hash() const;

  private:
    std::vector<std::string> names_;
    std::vector<double> medians_;
    std::vector<RobustScale> scales_;
    std::vector<std::vector<Cell>> reference_raw_;    // [column][train row]
    std::vector<std::vector<Cell>> reference_scaled_; // [column][train row]
    std::vector<std::string> groups_;
    KnnOptions options_;
};

// Training-median imputation; an all-missing column fills with 0 and warns.
struct MedianImputer {
    std::vector<std::string> names;
    std::vector<double> medians;
    std::vector<bool> all_missing;

    static MedianImputer fit(const CellBlock& train);
    void transform_row(std::vector<Cell>& row) const;
};

enum class ImputerKind { iterative, knn, median };

const char* imputer_kind_name(ImputerKind kind);

// Fold-local preprocessing: family imputation, winsorisation and robust
// scaling, every parameter a pure function of the training partition.
struct PreprocessOptions {
    double winsor_level = 0.01;
    size_t knn_k = 5;
    IterativeOptions iterative;
};

class FoldPreprocessor {
  public:
    static FoldPreprocessor fit(const engineer::FieldMatrix& matrix,
                                const std::vector<size_t>& train_rows,
                                const PreprocessOptions& options = PreprocessOptions());

    // Transforms candidate columns of the given rows; the result is dense
    // (no missing cells) in fitted-column order.
    struct Transformed {
        std::vector<std::string> names;
        std::vector<std::vector<double>> rows; // [row][column]
    };
    Transformed apply(const engineer::FieldMatrix& matrix,
                      const std::vector<size_t>& rows) const;

    const std::vector<std::string>& warnings() const { return warnings_; }

    // Flat-text parameter dump (fold<k>_preprocess.txt artifact).
    std::string dump() const;

  private:
    struct ColumnState {
        std::string name;
        Family family = Family::meteorology;
        ImputerKind imputer = ImputerKind::median;
        WinsorBounds winsor;
        RobustScale scale;
    };

    // Family imputation only, fitted-column order; dense output.
    std::vector<double> impute_row(const engineer::FieldMatrix& matrix, size_t row,
                                   std::vector<std::string>* notes) const;

    std::vector<ColumnState> columns_; // name-sorted
    IterativeImputer iterative_;
    KnnImputer knn_;
    MedianImputer median_;
    bool have_iterative_ = false;
    bool have_knn_ = false;
    std::vector<size_t> iterative_slots_; // positions in columns_ per imputer column
    std::vector<size_t> knn_slots_;
    std::vector<size_t> median_slots_;
    std::vector<std::string> warnings_;
    PreprocessOptions options_;
};

} // namespace unicrop::preprocess
