#include "fedforest/split.hpp"

#include <algorithm>
#include <cmath>

namespace fedforest {

SplitCandidate SplitCandidate::numeric(int feature, double threshold) {
  SplitCandidate c;
  c.kind = SplitKind::kNumeric;
  c.feature = feature;
  c.threshold = threshold;
  return c;
}

SplitCandidate SplitCandidate::categorical(int feature, std::vector<int> left_categories) {
  SplitCandidate c;
  c.kind = SplitKind::kCategorical;
  c.feature = feature;
  std::sort(left_categories.begin(), left_categories.end());
  c.left_set = std::move(left_categories);
  return c;
}

SplitCandidate SplitCandidate::client_set(std::vector<int> left_clients) {
  SplitCandidate c;
  c.kind = SplitKind::kClientSet;
  std::sort(left_clients.begin(), left_clients.end());
  c.left_set = std::move(left_clients);
  return c;
}

bool candidate_less(const SplitCandidate& a, const SplitCandidate& b) {
  if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  if (a.feature != b.feature) return a.feature < b.feature;
  if (a.kind == SplitKind::kNumeric) return a.threshold < b.threshold;
  return std::lexicographical_compare(a.left_set.begin(), a.left_set.end(),
                                      b.left_set.begin(), b.left_set.end());
}

namespace {

// Grouping score that makes the optimal bipartition a contiguous prefix:
// mean outcome for regression, positive-class share for binary tasks,
// and the share of the globally most frequent category otherwise.
double grouping_score(const SuffStats& s, std::size_t anchor_category) {
  const double n = static_cast<double>(s.n);
  if (!s.is_classification()) return s.sum_y / n;
  return static_cast<double>(s.counts[anchor_category]) / n;
}

std::size_t pick_anchor_category(const std::map<int, SuffStats>& per_group,
                                 const TaskKind& task) {
  if (!task.is_classification()) return 0;
  if (task.num_categories == 2) return 1;  // positive-class proportion
  std::vector<std::int64_t> totals(static_cast<std::size_t>(task.num_categories), 0);
  for (const auto& [id, s] : per_group) {
    for (std::size_t c = 0; c < s.counts.size(); ++c) totals[c] += s.counts[c];
  }
  return static_cast<std::size_t>(
      std::max_element(totals.begin(), totals.end()) - totals.begin());
}

std::vector<SplitCandidate> prefix_candidates(const std::map<int, SuffStats>& per_group,
                                              const TaskKind& task, SplitKind kind,
                                              int feature) {
  const std::vector<int> order = fisher_order(per_group, task);
  std::vector<SplitCandidate> out;
  if (order.size() < 2) return out;
  std::vector<int> prefix;
  prefix.reserve(order.size() - 1);
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    prefix.push_back(order[i]);
    out.push_back(kind == SplitKind::kClientSet
                      ? SplitCandidate::client_set(prefix)
                      : SplitCandidate::categorical(feature, prefix));
  }
  return out;
}

}  // namespace

std::vector<int> fisher_order(const std::map<int, SuffStats>& per_group,
                              const TaskKind& task) {
  const std::size_t anchor = pick_anchor_category(per_group, task);
  std::vector<std::pair<double, int>> scored;
  for (const auto& [id, s] : per_group) {
    if (s.n == 0) continue;
    scored.emplace_back(grouping_score(s, anchor), id);
  }
  std::sort(scored.begin(), scored.end());  // score ascending, then id
  std::vector<int> order;
  order.reserve(scored.size());
  for (const auto& [score, id] : scored) order.push_back(id);
  return order;
}

std::vector<SplitCandidate> client_set_candidates(const std::map<int, SuffStats>& per_client,
                                                  const TaskKind& task) {
  return prefix_candidates(per_client, task, SplitKind::kClientSet, -1);
}

std::vector<SplitCandidate> categorical_candidates(int feature,
                                                   const std::map<int, SuffStats>& per_category,
                                                   const TaskKind& task) {
  return prefix_candidates(per_category, task, SplitKind::kCategorical, feature);
}

std::vector<double> exact_midpoints(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<double> out;
  if (sorted.size() < 2) return out;
  out.reserve(sorted.size() - 1);
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    out.push_back(sorted[i] + (sorted[i + 1] - sorted[i]) / 2.0);
  }
  return out;
}

std::optional<ScoredSplit> evaluate_exact(const SuffStats& parent,
                                          const std::map<int, SuffStats>& left_per_client,
                                          ImpurityKind kind) {
  SuffStats left = SuffStats::zero(parent.is_classification()
                                       ? TaskKind::classification(
                                             static_cast<int>(parent.counts.size()))
                                       : TaskKind::regression());
  for (const auto& [client, s] : left_per_client) left = add_stats(left, s);
  const std::optional<double> gain = split_gain(parent, left, kind);
  if (!gain) return std::nullopt;
  ScoredSplit out;
  out.gain = *gain;
  out.right = sub_stats(parent, left);
  out.left = std::move(left);
  out.exact = true;
  out.left_count_estimate = out.left.n;
  out.right_count_estimate = out.right.n;
  return out;
}

std::optional<double> average_local_gain(const std::map<int, double>& local_gains,
                                         const std::map<int, std::int64_t>& node_counts) {
  std::int64_t total = 0;
  for (const auto& [client, gain] : local_gains) {
    const auto it = node_counts.find(client);
    if (it == node_counts.end()) {
      throw ProtocolError("local gain from client " + std::to_string(client) +
                          " without a node count");
    }
    total += it->second;
  }
  if (total == 0) return std::nullopt;
  double avg = 0.0;
  for (const auto& [client, gain] : local_gains) {
    avg += (static_cast<double>(node_counts.at(client)) / static_cast<double>(total)) * gain;
  }
  return avg;
}

std::vector<int> merge_shortlists(std::span<const std::vector<int>> per_client_features) {
  std::vector<int> out;
  for (const auto& features : per_client_features) {
    out.insert(out.end(), features.begin(), features.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<ScoredSplit> select_best(std::span<const ScoredSplit> scored,
                                       std::int64_t min_leaf, double min_gain) {
  const ScoredSplit* best = nullptr;
  for (const ScoredSplit& s : scored) {
    if (!(s.gain > min_gain)) continue;  // also drops NaN scores
    if (s.left_count_estimate < min_leaf || s.right_count_estimate < min_leaf) continue;
    if (best == nullptr || s.gain > best->gain ||
        (s.gain == best->gain && candidate_less(s.candidate, best->candidate))) {
      best = &s;
    }
  }
  if (best == nullptr) return std::nullopt;
  return *best;
}

}  // namespace fedforest
