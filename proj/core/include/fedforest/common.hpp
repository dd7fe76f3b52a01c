#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fedforest {

// Raised when a node-level statistic is requested for zero samples.
class EmptyNodeError : public std::runtime_error {
 public:
  explicit EmptyNodeError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when aggregated client messages are mutually inconsistent,
// e.g. a left-child summary exceeding its parent. Carries enough context
// to identify the offending node and client.
class ProtocolError : public std::runtime_error {
 public:
  explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid run configuration (bad field values, unknown keys, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or mutually inconsistent input data files.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

enum class TaskType { kRegression, kClassification };

// Learning task: regression over reals or classification over
// categories 0..num_categories-1.
struct TaskKind {
  TaskType type = TaskType::kRegression;
  int num_categories = 0;  // >= 2 for classification, 0 otherwise

  static TaskKind regression() { return {TaskType::kRegression, 0}; }
  static TaskKind classification(int num_categories);

  bool is_classification() const { return type == TaskType::kClassification; }
  bool operator==(const TaskKind&) const = default;
};

enum class ImpurityKind { kVariance, kGini, kEntropy };

// Default impurity for a task: variance for regression, Gini for
// classification. Entropy is available through the configuration.
ImpurityKind default_impurity(const TaskKind& task);

// Checks the impurity/task pairing (variance is regression-only,
// Gini/entropy are classification-only).
void validate_impurity(ImpurityKind kind, const TaskKind& task);

std::string impurity_name(ImpurityKind kind);
ImpurityKind impurity_from_name(const std::string& name);

// Position of a node within a binary tree, encoded as the sequence of
// left(0)/right(1) steps from the root. depth <= 56 so the packed key
// stays unique inside 64 bits.
struct NodePath {
  std::uint32_t depth = 0;
  std::uint64_t bits = 0;  // bit i = direction taken at depth i

  static constexpr std::uint32_t kMaxDepth = 56;

  NodePath child(int direction) const;
  NodePath parent() const;
  int last_direction() const;  // direction taken into this node (0/1)
  std::uint64_t key() const { return (static_cast<std::uint64_t>(depth) << kMaxDepth) | bits; }
  std::string str() const;  // "" for the root, else e.g. "010"
  static NodePath parse(const std::string& text);

  auto operator<=>(const NodePath&) const = default;
};

}  // namespace fedforest
