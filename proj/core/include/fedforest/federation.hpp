#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "fedforest/config.hpp"
#include "fedforest/dataset.hpp"
#include "fedforest/forest.hpp"
#include "fedforest/ledger.hpp"
#include "fedforest/messages.hpp"
#include "fedforest/rng.hpp"

namespace fedforest {

// Bootstrap multiset (sorted row indices, drawn with replacement) for one
// (seed, tree, client) triple. Both the protocol and the centralized
// oracle use this schedule, so their trees are comparable node for node.
std::vector<std::uint32_t> stratified_bootstrap(std::uint64_t seed, int tree, int client_id,
                                                std::size_t num_rows);

// ceil(fraction * ids.size()) client ids drawn without replacement for
// one tree; result sorted.
std::vector<int> subsample_clients(std::span<const int> ids, double fraction,
                                   std::uint64_t seed, int tree);

// mtry distinct features drawn without replacement for one node; sorted.
std::vector<int> feature_subset(std::uint64_t seed, int tree, NodePath path, int num_features,
                                int mtry);

// Client endpoint of the protocol. Owns no data; it reads the shard it
// was constructed with and answers schema messages. Raw rows influence
// replies only through sketches, statistics and gains.
class SimulatedClient {
 public:
  explicit SimulatedClient(const ClientShard* shard) : shard_(shard) {}

  InitReply handle_init(const InitRequest& request);
  SketchReply handle_sketch(const SketchRequest& request);
  ShortlistReply handle_shortlist(const ShortlistRequest& request);
  EvalReply handle_eval(const EvalRequest& request);
  SummaryReply handle_summary(const SummaryRequest& request);
  ValueReply handle_values(const ValueRequest& request);

  int client_id() const { return shard_->client_id; }

 private:
  const ClientShard* shard_;
  TaskKind task_;
  ImpurityKind impurity_ = ImpurityKind::kVariance;
  Mode mode_ = Mode::kExactQuantiles;
  int sketch_levels_ = 0;
  int shortlist_size_ = 0;

  std::map<TaskRef, std::vector<std::uint32_t>> membership_;
  std::map<TaskRef, SuffStats> node_stats_;

  void apply_decisions(std::span<const SplitDecisionMsg> decisions);
  const std::vector<std::uint32_t>* rows_of(const TaskRef& ref) const;
  SuffStats stats_of(const TaskRef& ref, std::span<const std::uint32_t> rows);
};

// Server side of the protocol: grows all trees level by level across the
// simulated clients, recording every transmitted scalar.
class Trainer {
 public:
  Trainer(std::span<const ClientShard> shards, ForestConfig config);

  Forest fit();

  const CommLedger& ledger() const { return ledger_; }
  int levels_run() const { return levels_run_; }

 private:
  struct Build {
    SuffStats stats;
    bool stats_known = false;
    bool is_leaf = false;
    bool pending_summary = false;
    SplitCandidate split;
    bool has_split = false;
    double gain = 0.0;
    std::int64_t n_left = 0;
    std::int64_t n_right = 0;
  };

  std::vector<ClientShard> shards_;
  ForestConfig cfg_;
  ImpurityKind impurity_ = ImpurityKind::kVariance;
  int d_ = 0;
  int stat_size_ = 0;
  int mtry_ = 0;

  std::vector<SimulatedClient> clients_;
  std::vector<std::vector<int>> cohorts_;  // per tree: sorted client ids
  std::map<TaskRef, Build> nodes_;
  std::vector<TaskRef> frontier_;
  std::vector<SplitDecisionMsg> pending_decisions_;
  std::vector<std::vector<double>> histogram_grid_;  // per feature

  CommLedger ledger_;
  int levels_run_ = 0;

  void run_init();
  // One level of Algorithm-style processing over the current frontier;
  // returns the next frontier.
  std::vector<TaskRef> run_level(int level);
  void run_summary_round();

  int cohort_size(int tree) const {
    return static_cast<int>(cohorts_[static_cast<std::size_t>(tree)].size());
  }
  void finalize_leaf(Build& node);
  // Reverts a split whose child turned out smaller than min_leaf (the
  // averaged mode decides on estimated counts); the parent becomes a
  // leaf and both children are discarded.
  void demote_parent(const TaskRef& child, std::vector<TaskRef>& tasks);
  void record_decision(const TaskRef& ref, Build& node, const ScoredSplit& best, int level,
                       std::vector<TaskRef>& next_frontier);
  Forest assemble() const;
};

// Convenience wrapper: validate, train, return the forest (with ledger
// totals embedded).
Forest fit_forest(std::span<const ClientShard> shards, const ForestConfig& config);

}  // namespace fedforest
