#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fedforest/common.hpp"

namespace fedforest {

// Candidate generation / evaluation strategy of the training protocol.
//   kExactQuantiles : pooled-sketch thresholds, exact aggregated gains
//   kAvgImpTopL     : top-L shortlisting, count-weighted local gains
//   kFedHistogram   : fixed equal-width grid over the global range
//   kVerifyMidpoints: exact midpoints from transmitted node values; a
//                     verification mode for tiny inputs only, since it
//                     ships raw feature values to the server
enum class Mode { kExactQuantiles, kAvgImpTopL, kFedHistogram, kVerifyMidpoints };

std::string mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

struct ForestConfig {
  TaskKind task = TaskKind::regression();
  std::optional<ImpurityKind> impurity;  // defaults to variance / Gini by task
  int trees = 50;
  int max_depth = 8;
  std::int64_t min_leaf = 5;
  int mtry = 0;                 // 0 = task default: ceil(sqrt(d)) / max(1, d/3)
  int sketch_levels = 32;       // B
  int shortlist_size = 3;       // L, AvgImp only
  Mode mode = Mode::kExactQuantiles;
  bool include_h = false;       // offer client-set splits
  double client_fraction = 1.0; // fraction of clients drawn per tree
  double min_gain = 0.0;        // minimum impurity decrease to split
  bool bootstrap = true;
  bool dedup_candidates = true;
  std::uint64_t seed = 0;

  ImpurityKind resolved_impurity() const;
  int resolved_mtry(std::size_t num_features) const;
  void validate() const;
};

}  // namespace fedforest
