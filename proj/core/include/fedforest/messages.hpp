#pragma once

#include <cstdint>
#include <vector>

#include "fedforest/common.hpp"
#include "fedforest/config.hpp"
#include "fedforest/sketch.hpp"
#include "fedforest/split.hpp"
#include "fedforest/stats.hpp"

// Wire schema of the training protocol. Client uploads carry sketches,
// sufficient statistics, counts and gains only; no message type has a
// field for individual rows, so the raw-data firewall is a property of
// the schema rather than a convention. The single exception is
// ValueReply, which exists for the midpoint verification mode and is
// documented as such.
namespace fedforest {

// (tree, path) key of one node task.
struct TaskRef {
  int tree = 0;
  NodePath path;
  auto operator<=>(const TaskRef&) const = default;
};

struct InitRequest {
  TaskKind task;
  ImpurityKind impurity = ImpurityKind::kVariance;
  Mode mode = Mode::kExactQuantiles;
  int sketch_levels = 0;
  int shortlist_size = 0;
  int trees = 0;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  bool gather_ranges = false;                  // fed-histogram grid setup
  std::vector<std::vector<int>> tree_clients;  // participating ids per tree
};

struct InitReply {
  std::int64_t num_rows = 0;
  int num_features = 0;
  std::vector<double> feature_min;  // only when ranges were requested
  std::vector<double> feature_max;
};

// A split that was decided at the previous level; clients route their
// node rows into the children before answering new tasks.
struct SplitDecisionMsg {
  TaskRef node;
  SplitCandidate split;
};

// One node task: which features to sketch / shortlist / evaluate.
struct TaskAnnouncement {
  TaskRef node;
  std::vector<int> features;
};

struct SketchRequest {
  std::vector<SplitDecisionMsg> decisions;
  std::vector<TaskAnnouncement> tasks;
};

struct TaskSketches {
  TaskRef node;
  SuffStats node_stats;
  std::vector<QuantileSketch> sketches;  // aligned with the announced features
};

// Tasks where the client holds no rows are omitted entirely; the server
// reads a missing entry as a zero count.
struct SketchReply {
  int client_id = 0;
  std::vector<TaskSketches> tasks;
};

struct ShortlistRequest {
  std::vector<SplitDecisionMsg> decisions;
  std::vector<TaskAnnouncement> tasks;
};

struct TaskShortlist {
  TaskRef node;
  std::vector<int> features;  // locally strongest features, best first
  std::vector<double> gains;  // matching local best gains
};

struct ShortlistReply {
  int client_id = 0;
  std::vector<TaskShortlist> tasks;
};

struct CandidateBatch {
  TaskRef node;
  std::vector<SplitCandidate> candidates;  // numeric only; client-set splits
                                           // are scored server-side for free
};

struct EvalRequest {
  std::vector<CandidateBatch> tasks;
};

struct TaskEvaluation {
  TaskRef node;
  std::vector<SuffStats> left_stats;  // exact modes: one per candidate
  std::vector<double> local_gains;    // avgimp mode: one per candidate
};

struct EvalReply {
  int client_id = 0;
  std::vector<TaskEvaluation> tasks;
};

// Leaf summaries requested once at the end of an avgimp run for leaves
// whose statistics never travelled with a sketch phase.
struct SummaryRequest {
  std::vector<SplitDecisionMsg> decisions;
  std::vector<TaskRef> nodes;
};

struct TaskSummary {
  TaskRef node;
  SuffStats node_stats;
};

struct SummaryReply {
  int client_id = 0;
  std::vector<TaskSummary> nodes;
};

// Verification mode only: node-local feature values (sorted per feature),
// from which the server derives exact midpoint candidates.
struct ValueRequest {
  std::vector<SplitDecisionMsg> decisions;
  std::vector<TaskAnnouncement> tasks;
};

struct TaskValues {
  TaskRef node;
  SuffStats node_stats;
  std::vector<std::vector<double>> values;  // aligned with announced features
};

struct ValueReply {
  int client_id = 0;
  std::vector<TaskValues> tasks;
};

}  // namespace fedforest
