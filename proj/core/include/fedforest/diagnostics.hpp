#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedforest/dataset.hpp"

namespace fedforest {

// Pre-flight heterogeneity probes. The model-based probes work from
// held-out rows: a per-client deterministic split reserves a fraction of
// each shard for measurement. The root screen reads left counts only.
struct DiagnosticsOptions {
  int trees = 25;
  int max_depth = 4;
  int sketch_levels = 32;
  std::int64_t min_leaf = 5;
  double holdout_fraction = 0.5;
  double site_auc_threshold = 0.6;    // covariate shift flag cut-off
  double root_gain_threshold = 0.1;   // site-Gini screen cut-off
  double outcome_delta_threshold = 0.02;  // outcome shift flag cut-off
  std::uint64_t seed = 0;
};

struct DiagnosticsReport {
  // Root screen with the client index as the label: per candidate each
  // client discloses its left count, the server scores a Gini gain over
  // sites. The per-feature maxima, and the best gain overall.
  std::vector<double> per_feature_site_gains;
  double covariate_shift_gain = 0.0;
  // How well a forest told sites apart from covariates alone: macro
  // one-vs-rest AUC over held-out rows. 0.5 means indistinguishable.
  double site_auc = 0.5;
  // Held-out skill (R^2 for regression, accuracy for classification)
  // of a forest without and with client-set splits, and their gap.
  double metric_x = 0.0;
  double metric_xh = 0.0;
  double outcome_delta = 0.0;
  bool covariate_shift = false;
  bool outcome_shift = false;
  // Safe to skip the heterogeneity-aware machinery when nothing fired.
  bool fast_mode_ok = false;
};

DiagnosticsReport run_diagnostics(std::span<const ClientShard> shards,
                                  const TaskKind& task,
                                  const DiagnosticsOptions& options);

}  // namespace fedforest
