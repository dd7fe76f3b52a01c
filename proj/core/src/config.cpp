#include "fedforest/config.hpp"

#include <cmath>

namespace fedforest {

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::kExactQuantiles: return "exact-quantiles";
    case Mode::kAvgImpTopL: return "avgimp-topl";
    case Mode::kFedHistogram: return "fed-histogram";
    case Mode::kVerifyMidpoints: return "verify-midpoints";
  }
  throw ConfigError("unknown mode");
}

Mode mode_from_name(const std::string& name) {
  if (name == "exact-quantiles") return Mode::kExactQuantiles;
  if (name == "avgimp-topl") return Mode::kAvgImpTopL;
  if (name == "fed-histogram") return Mode::kFedHistogram;
  if (name == "verify-midpoints") return Mode::kVerifyMidpoints;
  throw ConfigError("unknown mode '" + name + "'");
}

ImpurityKind ForestConfig::resolved_impurity() const {
  const ImpurityKind kind = impurity.value_or(default_impurity(task));
  validate_impurity(kind, task);
  return kind;
}

int ForestConfig::resolved_mtry(std::size_t num_features) const {
  const int d = static_cast<int>(num_features);
  if (mtry > 0) return std::min(mtry, d);
  if (task.is_classification()) {
    return std::min(d, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d)))));
  }
  return std::max(1, d / 3);
}

void ForestConfig::validate() const {
  if (trees < 1) throw ConfigError("trees must be >= 1");
  if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (max_depth > static_cast<int>(NodePath::kMaxDepth)) {
    throw ConfigError("max_depth must be <= " + std::to_string(NodePath::kMaxDepth));
  }
  if (min_leaf < 1) throw ConfigError("min_leaf must be >= 1");
  if (mtry < 0) throw ConfigError("mtry must be >= 0 (0 = task default)");
  if (sketch_levels < 2) throw ConfigError("sketch_levels must be >= 2");
  if (shortlist_size < 1) throw ConfigError("shortlist_size must be >= 1");
  if (!(client_fraction > 0.0 && client_fraction <= 1.0)) {
    throw ConfigError("client_fraction must be in (0, 1]");
  }
  if (min_gain < 0.0) throw ConfigError("min_gain must be >= 0");
  if (task.is_classification() && task.num_categories < 2) {
    throw ConfigError("classification requires num_categories >= 2");
  }
  resolved_impurity();
}

}  // namespace fedforest
