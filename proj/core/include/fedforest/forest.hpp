#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fedforest/config.hpp"
#include "fedforest/dataset.hpp"
#include "fedforest/ledger.hpp"
#include "fedforest/split.hpp"
#include "fedforest/stats.hpp"

namespace fedforest {

struct TreeNode {
  bool leaf = true;
  // internal nodes
  SplitCandidate split;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int64_t n_left = 0;   // training rows routed left; drives the
  std::int64_t n_right = 0;  // larger-child fallback for unseen clients
  // leaves
  double prediction = 0.0;
  SuffStats stats;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  // Fixed root ordering of client ids when the tree splits on the
  // encoded client feature (centralized training with H); empty
  // otherwise.
  std::vector<int> h_root_order;
};

struct Forest {
  TaskKind task;
  ImpurityKind impurity = ImpurityKind::kVariance;
  std::size_t num_features = 0;
  ForestConfig config;  // training configuration echo
  LedgerTotals ledger;
  std::vector<Tree> trees;

  bool uses_client_splits() const;
};

// Routes one row through one tree. `h` is the row's client id; it is
// required at client-set splits and at the encoded client feature
// (feature index == num_features). When `h` is absent or was never seen
// in training, the larger child is taken unless strict_h is set, in
// which case a DataError is raised.
double predict_tree(const Tree& tree, std::size_t num_features, std::span<const double> x,
                    std::optional<int> h, bool strict_h = false);

// Forest prediction: mean over trees for regression, plurality category
// vote (lowest index on ties) for classification.
double predict(const Forest& forest, std::span<const double> x, std::optional<int> h = {},
               bool strict_h = false);

// Per-category fraction of tree votes; classification forests only.
std::vector<double> vote_shares(const Forest& forest, std::span<const double> x,
                                std::optional<int> h = {});

// Batch prediction over a pooled table (client ids taken from the rows).
std::vector<double> predict_all(const Forest& forest, const Dataset& data,
                                bool strict_h = false);

}  // namespace fedforest
