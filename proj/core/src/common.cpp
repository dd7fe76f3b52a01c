#include "fedforest/common.hpp"

namespace fedforest {

TaskKind TaskKind::classification(int num_categories) {
  if (num_categories < 2) {
    throw ConfigError("classification requires at least 2 categories, got " +
                      std::to_string(num_categories));
  }
  return {TaskType::kClassification, num_categories};
}

ImpurityKind default_impurity(const TaskKind& task) {
  return task.is_classification() ? ImpurityKind::kGini : ImpurityKind::kVariance;
}

void validate_impurity(ImpurityKind kind, const TaskKind& task) {
  const bool classification = kind != ImpurityKind::kVariance;
  if (classification != task.is_classification()) {
    throw ConfigError(classification ? "Gini/entropy impurity requires a classification task"
                                     : "variance impurity requires a regression task");
  }
}

NodePath NodePath::child(int direction) const {
  if (depth >= kMaxDepth) throw ConfigError("tree depth limit exceeded");
  NodePath out = *this;
  if (direction != 0) out.bits |= (std::uint64_t{1} << depth);
  out.depth = depth + 1;
  return out;
}

NodePath NodePath::parent() const {
  if (depth == 0) throw ConfigError("root node has no parent");
  NodePath out = *this;
  out.depth = depth - 1;
  out.bits = bits & ~(std::uint64_t{1} << (depth - 1));
  return out;
}

int NodePath::last_direction() const {
  if (depth == 0) throw ConfigError("root node has no incoming direction");
  return (bits >> (depth - 1)) & 1 ? 1 : 0;
}

std::string NodePath::str() const {
  std::string out(depth, '0');
  for (std::uint32_t i = 0; i < depth; ++i) {
    if (bits & (std::uint64_t{1} << i)) out[i] = '1';
  }
  return out;
}

NodePath NodePath::parse(const std::string& text) {
  NodePath out;
  for (char c : text) {
    if (c != '0' && c != '1') throw DataError("invalid node path: " + text);
    out = out.child(c - '0');
  }
  return out;
}

std::string impurity_name(ImpurityKind kind) {
  switch (kind) {
    case ImpurityKind::kVariance: return "variance";
    case ImpurityKind::kGini: return "gini";
    case ImpurityKind::kEntropy: return "entropy";
  }
  throw ConfigError("unknown impurity kind");
}

ImpurityKind impurity_from_name(const std::string& name) {
  if (name == "variance") return ImpurityKind::kVariance;
  if (name == "gini") return ImpurityKind::kGini;
  if (name == "entropy") return ImpurityKind::kEntropy;
  throw ConfigError("unknown impurity '" + name + "'");
}

}  // namespace fedforest
