#pragma once

#include <map>
#include <string>
#include <vector>

#include "unicrop/core/family.hpp"
#include "unicrop/core/numeric.hpp"

namespace unicrop::selection {

// A named candidate column plus the family tag screening needs.
struct Candidate {
    std::string name;
    Family family = Family::meteorology;
    std::vector<Cell> values;
};

// Plug-in mutual information in nats over a contingency table built by
// equal-frequency binning of each variable into max(2, min(8, floor(
// sqrt(n/5)))) bins; ties share a bin. Pairwise-complete observations,
// n >= 5 required. Symmetric in its arguments by construction.
double mutual_information(const std::vector<Cell>& x, const std::vector<Cell>& y);

size_t mi_bin_count(size_t n);

// Equal-frequency bin assignment used by the MI estimator (exposed for the
// oracle tests). Returns a bin id per value.
std::vector<size_t> quantile_bins(const std::vector<double>& values, size_t bins);

struct RelevanceStats {
    std::string name;
    double mi = 0.0;       // nats, >= 0
    double pearson = 0.0;  // [-1, 1]
    double spearman = 0.0; // [-1, 1]
    double relevance = 0.0;
};

// Min-max normalises mi, |pearson| and |spearman| across the candidates and
// averages them. A constant component normalises to zeros.
std::vector<RelevanceStats> relevance_score(const std::vector<Candidate>& candidates,
                                            const std::vector<Cell>& target);

struct VarianceScreen {
    std::vector<Candidate> surviving;
    std::vector<std::string> dropped;
};

// Drops columns with <= 1 distinct non-missing value or sample std below
// 1e-8 * (|mean| + 1).
VarianceScreen drop_near_zero_variance(const std::vector<Candidate>& candidates);

struct PrunedPair {
    std::string kept;
    std::string dropped;
    double r = 0.0;
};

struct CollinearityScreen {
    std::vector<Candidate> surviving;
    std::vector<PrunedPair> pruned;
};

// Pairs with |r| >= 0.98 processed in descending |r|; within a pair the
// feature with lower MI against the target is dropped (ties drop the
// lexicographically larger name).
CollinearityScreen prune_collinear(const std::vector<Candidate>& candidates,
                                   const std::vector<Cell>& target);

struct FamilyRescue {
    std::vector<Candidate> pool;
    std::vector<std::string> rescued;
    std::vector<Family> absent_families;
};

// Restores, for any family left without survivors, its pruned feature with
// the highest MI against the target. Families absent from the data are
// recorded, not errors.
FamilyRescue preserve_families(const std::vector<Candidate>& surviving,
                               const std::vector<Candidate>& pruned,
                               const std::vector<Cell>& target);

enum class Criterion { difference, ratio };

const char* criterion_name(Criterion criterion);

struct SelectedFeature {
    std::string name;
    double relevance = 0.0;
    double redundancy = 0.0;
    double criterion_value = 0.0;
};

struct MrmrOptions {
    size_t k = 15;
    Criterion criterion = Criterion::ratio;
    double epsilon = 1e-9;
};

// Greedy mRMR: first pick maximises relevance, later picks maximise
// relevance - R(f;S) or relevance / (R(f;S) + eps), where R(f;S) is the
// mean pairwise MI against the selected set normalised by the pool-wide
// maximum pairwise MI. Ties resolve lexicographically.
std::vector<SelectedFeature> mrmr_select(const std::vector<Candidate>& pool,
                                         const std::vector<Cell>& target,
                                         const MrmrOptions& options = {});

// Full screening pass as run inside one fold, with the artifact report.
struct SelectionReport {
    std::vector<std::string> dropped_zero_variance;
    std::vector<PrunedPair> pruned_collinear;
    std::vector<std::string> family_rescued;
    std::vector<std::string> absent_families;
    std::vector<SelectedFeature> selected;
    Criterion criterion = Criterion::ratio;
    double epsilon = 1e-9;
};

SelectionReport screen_and_select(const std::vector<Candidate>& candidates,
                                  const std::vector<Cell>& target,
                                  const MrmrOptions& options = {});

} // namespace unicrop::selection
