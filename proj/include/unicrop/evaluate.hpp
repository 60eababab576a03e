#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "unicrop/core/numeric.hpp"
#include "unicrop/engineer.hpp"
#include "unicrop/learners.hpp"
#include "unicrop/preprocess.hpp"
#include "unicrop/screen_select.hpp"

namespace unicrop::evaluate {

// Shuffled k-fold assignment: a pure function of (seed, row count), dealt
// into contiguous blocks whose sizes differ by at most one.
struct FoldAssignment {
    std::uint64_t seed = 0;
    size_t folds = 0;
    std::vector<size_t> fold_of_row;

    std::vector<size_t> rows_in_fold(size_t fold) const;
    std::vector<size_t> rows_not_in_fold(size_t fold) const;
};

FoldAssignment kfold_split(size_t n, size_t k, std::uint64_t seed);

struct MetricSet {
    double rmse = 0.0;
    double mae = 0.0;
    Cell r2;   // missing when SST == 0 (degenerate target)
    Cell mape; // missing when every target is zero
    size_t mape_excluded = 0;
};

MetricSet compute_metrics(const std::vector<double>& observed,
                          const std::vector<double>& predicted);

// Simplex-constrained least squares over out-of-fold predictions:
//   min ||y - P w||^2  s.t.  w >= 0, sum w = 1,
// solved exactly by active-set enumeration (every KKT point of the convex
// QP lies on a face of the simplex).
struct EnsembleWeights {
    std::vector<std::string> models;
    std::vector<double> weights;
    double objective = 0.0;
};

EnsembleWeights fit_ensemble_weights(const std::vector<std::vector<double>>& predictions,
                                     const std::vector<double>& target,
                                     const std::vector<std::string>& model_names);

enum class ShapleyMode { exact, sampled };

struct ShapleyOptions {
    ShapleyMode mode = ShapleyMode::sampled;
    size_t budget = 5000; // permutations in sampled mode
    std::uint64_t seed = 1;
};

// Background-replacement (interventional) Shapley values. v(T) evaluates
// the model on the explained row with features outside T replaced by
// background values, averaged over the background rows.
struct ShapleyAttribution {
    std::vector<std::string> features;
    std::vector<std::vector<double>> phi; // [explained row][feature]
    std::vector<double> base;             // v(empty set) per explained row
    std::vector<double> prediction;       // v(full set) per explained row
    std::vector<double> mean_abs_phi;     // global importance per feature
};

ShapleyAttribution shapley_importance(const learners::Regressor& model,
                                      const learners::Dataset& explain,
                                      const std::vector<std::vector<double>>& background,
                                      const ShapleyOptions& options);

struct RunCvOptions {
    size_t folds = 5;
    std::uint64_t cv_seed = 42;
    std::uint64_t learner_seed = 7;
    selection::MrmrOptions mrmr;
    preprocess::PreprocessOptions preprocess;
    learners::ElasticNetOptions elastic_net;
    learners::RandomForestOptions random_forest;
    learners::GradientBoostingOptions gradient_boosting;
    learners::SvrOptions svr;
    bool shapley_enabled = true;
    ShapleyOptions shapley;      // mode upgraded to exact when p <= 12
    size_t shapley_sample = 50;  // explained rows
    size_t shapley_background = 1; // 1 = training-median row, else sample size
};

struct FoldOutput {
    size_t fold = 0;
    std::vector<size_t> validation_rows;
    selection::SelectionReport selection;
    std::string preprocess_dump;
    std::vector<std::string> warnings;
};

struct CvResult {
    std::vector<std::string> model_names;
    std::vector<bool> model_ok;
    std::vector<std::string> field_ids; // modelling rows (yield present)
    std::vector<double> observed;
    std::vector<size_t> fold_of_row;
    std::vector<std::vector<Cell>> oof; // [model][row]
    std::vector<FoldOutput> folds;
    EnsembleWeights ensemble;
    std::vector<Cell> ensemble_oof;
    std::vector<std::pair<std::string, MetricSet>> metrics; // model rows + ensemble last
    std::string shapley_model;
    std::vector<std::string> final_selected;
    ShapleyAttribution shapley;
    std::vector<std::string> warnings;
};

// Full leakage-free cross-validation over the field matrix: per fold the
// preprocessing, screening and mRMR selection are fit on the training
// partition only; the four learners train on the transformed training rows
// and predict the validation rows. The ensemble is fit once on the
// concatenated out-of-fold matrix.
CvResult run_cv(const engineer::FieldMatrix& matrix, const RunCvOptions& options);

} // namespace unicrop::evaluate
