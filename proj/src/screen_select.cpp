#include "unicrop/screen_select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "unicrop/core/error.hpp"
#include "unicrop/core/stats.hpp"

namespace unicrop::selection {

namespace {

constexpr double kVarianceFloorScale = 1e-8;
constexpr double kCollinearityThreshold = 0.98;

double mi_from_pairs(const std::vector<double>& x, const std::vector<double>& y);

// Guarded variant used inside screening loops: degenerate inputs score zero
// instead of throwing.
double mi_or_zero(const std::vector<Cell>& x, const std::vector<Cell>& y) {
    const auto pairs = stats::complete_pairs(x, y);
    if (pairs.x.size() < 5) return 0.0;
    return mi_from_pairs(pairs.x, pairs.y);
}

double mi_from_pairs(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    const size_t bins = mi_bin_count(n);
    const auto bx = quantile_bins(x, bins);
    const auto by = quantile_bins(y, bins);

    std::vector<std::vector<double>> counts(bins, std::vector<double>(bins, 0.0));
    std::vector<double> row_counts(bins, 0.0);
    std::vector<double> col_counts(bins, 0.0);
    for (size_t i = 0; i < n; ++i) {
        counts[bx[i]][by[i]] += 1.0;
        row_counts[bx[i]] += 1.0;
        col_counts[by[i]] += 1.0;
    }

    const double total = static_cast<double>(n);
    double mi = 0.0;
    for (size_t i = 0; i < bins; ++i) {
        for (size_t j = 0; j < bins; ++j) {
            const double c = counts[i][j];
            if (c <= 0.0) continue;
            mi += (c / total) * std::log(c * total / (row_counts[i] * col_counts[j]));
        }
    }
    return std::max(0.0, mi);
}

std::vector<size_t> sorted_by_name(const std::vector<Candidate>& candidates) {
    std::vector<size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return candidates[a].name < candidates[b].name;
    });
    return order;
}

double min_max_normalise(double value, double lo, double hi) {
    if (hi - lo <= 0.0) return 0.0;
    return (value - lo) / (hi - lo);
}

} // namespace

size_t mi_bin_count(size_t n) {
    const size_t root = static_cast<size_t>(std::floor(std::sqrt(static_cast<double>(n) / 5.0)));
    return std::max<size_t>(2, std::min<size_t>(8, root));
}

std::vector<size_t> quantile_bins(const std::vector<double>& values, size_t bins) {
    std::vector<double> edges;
    edges.reserve(bins - 1);
    for (size_t j = 1; j < bins; ++j) {
        edges.push_back(stats::percentile(values, static_cast<double>(j) / static_cast<double>(bins)));
    }
    std::vector<size_t> assignment(values.size(), 0);
    for (size_t i = 0; i < values.size(); ++i) {
        size_t bin = 0;
        for (double edge : edges) {
            if (edge <= values[i]) ++bin;
        }
        assignment[i] = bin;
    }
    return assignment;
}

double mutual_information(const std::vector<Cell>& x, const std::vector<Cell>& y) {
    const auto pairs = stats::complete_pairs(x, y);
    if (pairs.x.size() < 5) {
        throw Error(Errc::too_few_samples, "mutual information needs >= 5 paired samples, got " +
                                               std::to_string(pairs.x.size()));
    }
    return mi_from_pairs(pairs.x, pairs.y);
}

std::vector<RelevanceStats> relevance_score(const std::vector<Candidate>& candidates,
                                            const std::vector<Cell>& target) {
    std::vector<RelevanceStats> stats_list;
    stats_list.reserve(candidates.size());
    for (const auto& candidate : candidates) {
        RelevanceStats entry;
        entry.name = candidate.name;
        const auto pairs = stats::complete_pairs(candidate.values, target);
        if (pairs.x.size() >= 5) {
            entry.mi = mi_from_pairs(pairs.x, pairs.y);
            entry.pearson = stats::pearson(pairs.x, pairs.y);
            entry.spearman = stats::spearman(pairs.x, pairs.y);
        }
        stats_list.push_back(entry);
    }
    if (stats_list.empty()) return stats_list;

    auto component_range = [&](auto getter) {
        double lo = getter(stats_list.front());
        double hi = lo;
        for (const auto& entry : stats_list) {
            lo = std::min(lo, getter(entry));
            hi = std::max(hi, getter(entry));
        }
        return std::make_pair(lo, hi);
    };
    const auto mi_range = component_range([](const RelevanceStats& s) { return s.mi; });
    const auto pearson_range =
        component_range([](const RelevanceStats& s) { return std::abs(s.pearson); });
    const auto spearman_range =
        component_range([](const RelevanceStats& s) { return std::abs(s.spearman); });

    for (auto& entry : stats_list) {
        const double mi_norm = min_max_normalise(entry.mi, mi_range.first, mi_range.second);
        const double pearson_norm = min_max_normalise(std::abs(entry.pearson),
                                                      pearson_range.first, pearson_range.second);
        const double spearman_norm = min_max_normalise(std::abs(entry.spearman),
                                                       spearman_range.first, spearman_range.second);
        entry.relevance = (mi_norm + pearson_norm + spearman_norm) / 3.0;
    }
    return stats_list;
}

VarianceScreen drop_near_zero_variance(const std::vector<Candidate>& candidates) {
    VarianceScreen screen;
    for (const auto& candidate : candidates) {
        const auto values = stats::non_missing(candidate.values);
        const std::set<double> distinct(values.begin(), values.end());
        bool drop = distinct.size() <= 1;
        if (!drop) {
            const double floor = kVarianceFloorScale * (std::abs(stats::mean(values)) + 1.0);
            drop = stats::sample_std(values) < floor;
        }
        if (drop) screen.dropped.push_back(candidate.name);
        else screen.surviving.push_back(candidate);
    }
    return screen;
}

CollinearityScreen prune_collinear(const std::vector<Candidate>& candidates,
                                   const std::vector<Cell>& target) {
    const auto order = sorted_by_name(candidates);

    std::vector<double> mi_to_target(candidates.size());
    for (size_t i = 0; i < candidates.size(); ++i) {
        mi_to_target[i] = mi_or_zero(candidates[i].values, target);
    }

    struct PairEntry {
        size_t a; // index with lexicographically smaller name
        size_t b;
        double r;
    };
    std::vector<PairEntry> pairs;
    for (size_t oi = 0; oi < order.size(); ++oi) {
        for (size_t oj = oi + 1; oj < order.size(); ++oj) {
            const size_t a = order[oi];
            const size_t b = order[oj];
            const auto complete = stats::complete_pairs(candidates[a].values, candidates[b].values);
            if (complete.x.size() < 2) continue;
            const double r = stats::pearson(complete.x, complete.y);
            if (std::abs(r) >= kCollinearityThreshold) pairs.push_back({a, b, r});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [&](const PairEntry& lhs, const PairEntry& rhs) {
        if (std::abs(lhs.r) != std::abs(rhs.r)) return std::abs(lhs.r) > std::abs(rhs.r);
        if (candidates[lhs.a].name != candidates[rhs.a].name) {
            return candidates[lhs.a].name < candidates[rhs.a].name;
        }
        return candidates[lhs.b].name < candidates[rhs.b].name;
    });

    std::vector<bool> dropped(candidates.size(), false);
    CollinearityScreen screen;
    for (const auto& pair : pairs) {
        if (dropped[pair.a] || dropped[pair.b]) continue;
        size_t loser;
        if (mi_to_target[pair.a] != mi_to_target[pair.b]) {
            loser = mi_to_target[pair.a] < mi_to_target[pair.b] ? pair.a : pair.b;
        } else {
            loser = candidates[pair.a].name < candidates[pair.b].name ? pair.b : pair.a;
        }
        const size_t winner = loser == pair.a ? pair.b : pair.a;
        dropped[loser] = true;
        screen.pruned.push_back({candidates[winner].name, candidates[loser].name, pair.r});
    }
    for (size_t i = 0; i < candidates.size(); ++i) {
        if (!dropped[i]) screen.surviving.push_back(candidates[i]);
    }
    return screen;
}

FamilyRescue preserve_families(const std::vector<Candidate>& surviving,
                               const std::vector<Candidate>& pruned,
                               const std::vector<Cell>& target) {
    FamilyRescue rescue;
    rescue.pool = surviving;

    for (Family family : kAllFamilies) {
        const bool present = std::any_of(surviving.begin(), surviving.end(),
                                         [&](const Candidate& c) { return c.family == family; });
        if (present) continue;

        const Candidate* best = nullptr;
        double best_mi = -1.0;
        for (const auto& candidate : pruned) {
            if (candidate.family != family) continue;
            const double mi = mi_or_zero(candidate.values, target);
            if (mi > best_mi || (mi == best_mi && best && candidate.name < best->name)) {
                best = &candidate;
                best_mi = mi;
            }
        }
        if (best) {
            rescue.pool.push_back(*best);
            rescue.rescued.push_back(best->name);
        } else {
            rescue.absent_families.push_back(family);
        }
    }
    return rescue;
}

const char* criterion_name(Criterion criterion) {
    return criterion == Criterion::difference ? "DIFFERENCE" : "RATIO";
}

std::vector<SelectedFeature> mrmr_select(const std::vector<Candidate>& pool,
                                         const std::vector<Cell>& target,
                                         const MrmrOptions& options) {
    if (options.k == 0) return {};
    if (pool.empty()) throw Error(Errc::empty_pool, "mRMR invoked on an empty candidate pool");

    const auto order = sorted_by_name(pool);
    const auto relevance_stats = relevance_score(pool, target);

    // Pairwise MI, normalised by the pool-wide maximum so redundancy shares
    // the [0, 1] scale of the ensemble relevance.
    const size_t p = pool.size();
    std::vector<std::vector<double>> pair_mi(p, std::vector<double>(p, 0.0));
    double max_pair = 0.0;
    for (size_t oi = 0; oi < p; ++oi) {
        for (size_t oj = oi + 1; oj < p; ++oj) {
            const size_t a = order[oi];
            const size_t b = order[oj];
            const double mi = mi_or_zero(pool[a].values, pool[b].values);
            pair_mi[a][b] = mi;
            pair_mi[b][a] = mi;
            max_pair = std::max(max_pair, mi);
        }
    }
    if (max_pair > 0.0) {
        for (auto& row : pair_mi) {
            for (double& value : row) value /= max_pair;
        }
    }

    std::vector<bool> picked(p, false);
    std::vector<SelectedFeature> selection;
    std::vector<size_t> selected_indices;
    const size_t want = std::min(options.k, p);

    while (selection.size() < want) {
        long best = -1;
        double best_value = 0.0;
        double best_redundancy = 0.0;
        for (size_t oi = 0; oi < p; ++oi) {
            const size_t i = order[oi];
            if (picked[i]) continue;
            double redundancy = 0.0;
            double value;
            if (selected_indices.empty()) {
                value = relevance_stats[i].relevance;
            } else {
                for (size_t s : selected_indices) redundancy += pair_mi[i][s];
                redundancy /= static_cast<double>(selected_indices.size());
                value = options.criterion == Criterion::difference
                            ? relevance_stats[i].relevance - redundancy
                            : relevance_stats[i].relevance / (redundancy + options.epsilon);
            }
            if (best < 0 || value > best_value) {
                best = static_cast<long>(i);
                best_value = value;
                best_redundancy = redundancy;
            }
        }
        const size_t index = static_cast<size_t>(best);
        picked[index] = true;
        selected_indices.push_back(index);
        selection.push_back({pool[index].name, relevance_stats[index].relevance,
                             best_redundancy, best_value});
    }
    return selection;
}

SelectionReport screen_and_select(const std::vector<Candidate>& candidates,
                                  const std::vector<Cell>& target,
                                  const MrmrOptions& options) {
    SelectionReport report;
    report.criterion = options.criterion;
    report.epsilon = options.epsilon;

    const VarianceScreen variance = drop_near_zero_variance(candidates);
    report.dropped_zero_variance = variance.dropped;

    const CollinearityScreen collinear = prune_collinear(variance.surviving, target);
    report.pruned_collinear = collinear.pruned;

    std::vector<Candidate> pruned_candidates;
    for (const auto& pair : collinear.pruned) {
        for (const auto& candidate : variance.surviving) {
            if (candidate.name == pair.dropped) {
                pruned_candidates.push_back(candidate);
                break;
            }
        }
    }
    const FamilyRescue rescue =
        preserve_families(collinear.surviving, pruned_candidates, target);
    report.family_rescued = rescue.rescued;
    for (Family family : rescue.absent_families) {
        report.absent_families.push_back(family_name(family));
    }

    if (!rescue.pool.empty() && options.k > 0) {
        report.selected = mrmr_select(rescue.pool, target, options);
    }
    return report;
}

} // namespace unicrop::selection
