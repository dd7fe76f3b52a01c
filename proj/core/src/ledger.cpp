#include "fedforest/ledger.hpp"

#include <tuple>

namespace fedforest {

const char* phase_name(Phase phase) {
  switch (phase) {
    case Phase::kInit: return "init";
    case Phase::kTask: return "task";
    case Phase::kShortlist: return "shortlist";
    case Phase::kSketch: return "sketch";
    case Phase::kCandidates: return "candidates";
    case Phase::kEvaluate: return "evaluate";
    case Phase::kDecision: return "decision";
    case Phase::kSummary: return "summary";
  }
  return "?";
}

void CommLedger::record(int tree, NodePath path, Phase phase, std::int64_t up,
                        std::int64_t down, int clients) {
  const auto key = std::make_tuple(tree, path.key(), static_cast<int>(phase));
  auto& entry = entries_[key];
  entry.tree = tree;
  entry.path = path;
  entry.phase = phase;
  entry.scalars_up += up;
  entry.scalars_down += down;
  entry.clients += clients;
}

std::int64_t CommLedger::total_up() const {
  std::int64_t total = 0;
  for (const auto& [key, e] : entries_) total += e.scalars_up;
  return total;
}

std::int64_t CommLedger::total_down() const {
  std::int64_t total = 0;
  for (const auto& [key, e] : entries_) total += e.scalars_down;
  return total;
}

std::map<Phase, std::pair<std::int64_t, std::int64_t>> CommLedger::per_phase() const {
  std::map<Phase, std::pair<std::int64_t, std::int64_t>> out;
  for (const auto& [key, e] : entries_) {
    auto& [up, down] = out[e.phase];
    up += e.scalars_up;
    down += e.scalars_down;
  }
  return out;
}

std::vector<LedgerEntry> CommLedger::entries() const {
  std::vector<LedgerEntry> out;
  out.reserve(entries_.size());
  for (const auto& [key, e] : entries_) out.push_back(e);
  return out;
}

std::int64_t expected_upload_per_client(const NodeUploadModel& m) {
  const std::int64_t sketches =
      static_cast<std::int64_t>(m.sketched_features) * (m.sketch_levels + 1);
  switch (m.mode) {
    case Mode::kExactQuantiles:
      return sketches + m.stat_size +
             static_cast<std::int64_t>(m.num_candidates) * m.stat_size;
    case Mode::kAvgImpTopL:
      return 2 * static_cast<std::int64_t>(m.shortlist_reported) + sketches + m.stat_size +
             m.num_candidates;
    case Mode::kFedHistogram:
      return m.stat_size + static_cast<std::int64_t>(m.num_candidates) * m.stat_size;
    case Mode::kVerifyMidpoints:
      throw ConfigError("no closed-form upload model for the verification mode");
  }
  throw ConfigError("unknown mode");
}

int stat_size(const TaskKind& task) {
  return task.is_classification() ? task.num_categories : 3;
}

}  // namespace fedforest
