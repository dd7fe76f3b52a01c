#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "fedforest/sketch.hpp"
#include "fedforest/stats.hpp"

namespace fedforest {

enum class SplitKind {
  kNumeric,     // x[feature] <= threshold goes left
  kCategorical, // category of x[feature] in left_set goes left
  kClientSet,   // client id in left_set goes left (split on H)
};

// One candidate bipartition of a node. Numeric candidates are thresholds
// on a feature; categorical and client-set candidates list the values
// routed left. left_set is kept sorted.
struct SplitCandidate {
  SplitKind kind = SplitKind::kNumeric;
  int feature = -1;  // -1 for client-set candidates
  double threshold = 0.0;
  std::vector<int> left_set;

  static SplitCandidate numeric(int feature, double threshold);
  static SplitCandidate categorical(int feature, std::vector<int> left_categories);
  static SplitCandidate client_set(std::vector<int> left_clients);

  bool operator==(const SplitCandidate&) const = default;
};

// Deterministic total order used for tie-breaking: numeric before
// categorical before client-set; numeric by (feature, threshold);
// set-valued by (feature, lexicographically smaller left set).
bool candidate_less(const SplitCandidate& a, const SplitCandidate& b);

// A scored candidate. For exactly evaluated splits left/right are the
// children's statistics and gain equals split_gain(parent, left); for
// averaged scores the child statistics are estimates (see exact flag).
struct ScoredSplit {
  SplitCandidate candidate;
  double gain = 0.0;
  SuffStats left;
  SuffStats right;
  bool exact = true;  // false when gain is an averaged local score
  std::int64_t left_count_estimate = 0;
  std::int64_t right_count_estimate = 0;
};

// Contiguous-prefix candidates over client shards ordered by mean
// outcome (regression), positive-class proportion (binary), or the
// proportion of the globally most frequent category (multiclass).
// Clients with n = 0 are skipped; ties order by client id. Produces one
// candidate per proper prefix of the ordering.
std::vector<SplitCandidate> client_set_candidates(
    const std::map<int, SuffStats>& per_client, const TaskKind& task);

// Same contiguous-prefix construction over the per-category statistics
// of a categorical feature.
std::vector<SplitCandidate> categorical_candidates(
    int feature, const std::map<int, SuffStats>& per_category, const TaskKind& task);

// The ordering itself (client ids sorted by the grouping score), exposed
// for the fixed root encoding used by centralized training.
std::vector<int> fisher_order(const std::map<int, SuffStats>& per_group, const TaskKind& task);

// Midpoints between consecutive distinct sorted values; the centralized
// candidate rule, also used by the tiny-scale verification mode.
std::vector<double> exact_midpoints(std::span<const double> values);

// Scores a candidate from the aggregated left-child statistics of the
// reporting clients. The right child is parent - left; inconsistent
// aggregates raise ProtocolError. Unscoreable candidates (an empty
// child) return nullopt.
std::optional<ScoredSplit> evaluate_exact(const SuffStats& parent,
                                          const std::map<int, SuffStats>& left_per_client,
                                          ImpurityKind kind);

// Count-weighted average of client-local gains,
//   sum_k (n_k / n) g_k,
// the communication-light approximation of the exact gain. Clients whose
// local split is degenerate report g_k = 0. Returns nullopt when no
// client reports.
std::optional<double> average_local_gain(const std::map<int, double>& local_gains,
                                         const std::map<int, std::int64_t>& node_counts);

// Sorted union of per-client top-L feature shortlists.
std::vector<int> merge_shortlists(std::span<const std::vector<int>> per_client_features);

// Largest-gain candidate among `scored` after filtering children smaller
// than min_leaf (estimated counts for inexact scores) and gains not
// exceeding min_gain. Ties resolve by candidate_less, so the result is
// independent of input order.
std::optional<ScoredSplit> select_best(std::span<const ScoredSplit> scored,
                                       std::int64_t min_leaf, double min_gain = 0.0);

}  // namespace fedforest
