#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "fedforest/common.hpp"
#include "fedforest/config.hpp"

namespace fedforest {

// Protocol phase a transmission belongs to. Phases with client->server
// payloads are Init, Shortlist, Sketch, Evaluate and Summary; Task,
// Candidates and Decision are server->client broadcasts.
enum class Phase {
  kInit,
  kTask,
  kShortlist,
  kSketch,
  kCandidates,
  kEvaluate,
  kDecision,
  kSummary,
};

const char* phase_name(Phase phase);

// One ledger row: scalars moved for one node (or the whole run for Init)
// in one phase. Every transmitted double or integer counts as one scalar;
// broadcasts count once per receiving client.
struct LedgerEntry {
  int tree = -1;  // -1 for run-level traffic
  NodePath path;
  Phase phase = Phase::kInit;
  std::int64_t scalars_up = 0;
  std::int64_t scalars_down = 0;
  int clients = 0;  // replying clients (up) or recipients (down)
};

// Account of every scalar exchanged during one training run, kept per
// node and per phase, plus the number of server<->client contact rounds
// (one broadcast + one collect barrier each).
class CommLedger {
 public:
  void record(int tree, NodePath path, Phase phase, std::int64_t up, std::int64_t down,
              int clients);
  void count_round() { rounds_ += 1; }

  std::int64_t total_up() const;
  std::int64_t total_down() const;
  std::int64_t rounds() const { return rounds_; }
  std::map<Phase, std::pair<std::int64_t, std::int64_t>> per_phase() const;

  // Rows sorted by (tree, path, phase).
  std::vector<LedgerEntry> entries() const;

 private:
  std::map<std::tuple<int, std::uint64_t, int>, LedgerEntry> entries_;
  std::int64_t rounds_ = 0;
};

// Summary carried inside a trained model document.
struct LedgerTotals {
  std::int64_t scalars_up = 0;
  std::int64_t scalars_down = 0;
  std::int64_t rounds = 0;
  int levels = 0;  // tree levels that ran split search

  bool operator==(const LedgerTotals&) const = default;
};

// Closed-form expected client->server scalars for one node task and one
// participating client:
//   exact quantiles: d (B+1) + S + C S   (sketches + summary + left stats)
//   avgimp top-L:    2 L' + u (B+1) + S + C (shortlist pairs +
//                    union-feature sketches + summary + scalar gains)
//   fed histogram:   S + C S             (summary + left stats)
// where d = sketched features, u = union shortlist size, L' = reported
// shortlist pairs, C = broadcast numeric candidates, S = statistic size
// (3 for regression, num_categories for classification).
struct NodeUploadModel {
  Mode mode = Mode::kExactQuantiles;
  int sketched_features = 0;  // d for exact mode, union size for avgimp
  int sketch_levels = 0;      // B
  int stat_size = 0;          // S
  int num_candidates = 0;     // C
  int shortlist_reported = 0; // L'
};

std::int64_t expected_upload_per_client(const NodeUploadModel& model);

int stat_size(const TaskKind& task);

}  // namespace fedforest
