#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fedforest/common.hpp"

namespace fedforest {

// Additive sufficient statistics of a node sample. For regression the
// triple (n, sum_y, sum_yy); for classification the per-category counts.
// Adding two clients' statistics yields the statistics of the union, so a
// server can score splits without ever seeing a row.
struct SuffStats {
  std::int64_t n = 0;
  double sum_y = 0.0;
  double sum_yy = 0.0;
  std::vector<std::int64_t> counts;  // size num_categories; empty for regression

  static SuffStats zero(const TaskKind& task);
  static SuffStats from_sample(std::span<const double> y, const TaskKind& task);

  void accumulate(double y, const TaskKind& task);
  bool is_classification() const { return !counts.empty(); }
  bool operator==(const SuffStats&) const = default;
};

// Componentwise sum. Throws ProtocolError on mismatched task kinds.
SuffStats add_stats(const SuffStats& a, const SuffStats& b);

// Componentwise difference a - b, used to recover a right child from its
// parent and left sibling. Throws ProtocolError if any component of the
// result would be negative or the kinds mismatch.
SuffStats sub_stats(const SuffStats& a, const SuffStats& b);

// Impurity functional on a node's statistics:
//   variance: sum_yy/n - (sum_y/n)^2      (population form)
//   Gini:     1 - sum_c (n_c/n)^2
//   entropy:  -sum_c (n_c/n) log(n_c/n)   (natural log, 0 log 0 = 0)
// Tiny negative floating residue of the variance form is clamped to 0;
// impurity_raw keeps it for decomposition identities. Throws
// EmptyNodeError when n = 0.
double impurity(const SuffStats& stats, ImpurityKind kind);
double impurity_raw(const SuffStats& stats, ImpurityKind kind);

// Impurity decrease of the bipartition (left, parent - left):
//   gain = psi(parent) - (n_L/n) psi(left) - (n_R/n) psi(right).
// Empty children make the candidate unscoreable (nullopt), never an error.
std::optional<double> split_gain(const SuffStats& parent, const SuffStats& left,
                                 ImpurityKind kind);

// Heterogeneity gap across client shards of one node:
//   E = psi(sum_k s_k) - sum_k (n_k/n) psi(s_k).
// Nonnegative up to floating error; zero exactly when all client means
// (or per-category proportion vectors) coincide. Clients with n = 0 are
// ignored; all-empty input raises EmptyNodeError.
double heterogeneity_gap(std::span<const SuffStats> clients, ImpurityKind kind);

// Prediction stored at a leaf: the mean outcome for regression, or the
// plurality category (lowest index on ties) for classification.
double leaf_value(const SuffStats& stats, const TaskKind& task);

}  // namespace fedforest
