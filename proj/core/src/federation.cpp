#include "fedforest/federation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

namespace fedforest {

std::vector<std::uint32_t> stratified_bootstrap(std::uint64_t seed, int tree,
                                                int client_id,
                                                std::size_t num_rows) {
  auto rng = DeterministicRng::derive(seed, StreamTag::kBootstrap,
                                      static_cast<std::uint64_t>(tree),
                                      static_cast<std::uint64_t>(client_id));
  std::vector<std::uint32_t> idx(num_rows);
  for (auto& i : idx) {
    i = static_cast<std::uint32_t>(rng.next_below(num_rows));
  }
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<int> subsample_clients(std::span<const int> ids, double fraction,
                                   std::uint64_t seed, int tree) {
  std::vector<int> pool(ids.begin(), ids.end());
  if (fraction >= 1.0 || pool.size() <= 1) return pool;
  auto count = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(pool.size())));
  count = std::max<std::size_t>(1, std::min(count, pool.size()));
  // Partial Fisher-Yates, then restore sorted order.
  auto rng = DeterministicRng::derive(seed, StreamTag::kClientSubsample,
                                      static_cast<std::uint64_t>(tree));
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.next_below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<int> feature_subset(std::uint64_t seed, int tree, NodePath path,
                                int num_features, int mtry) {
  std::vector<int> all(static_cast<std::size_t>(num_features));
  for (int j = 0; j < num_features; ++j) all[static_cast<std::size_t>(j)] = j;
  if (mtry >= num_features) return all;
  auto rng = DeterministicRng::derive(seed, StreamTag::kFeatureSubset,
                                      static_cast<std::uint64_t>(tree),
                                      path.key());
  for (int i = 0; i < mtry; ++i) {
    auto j = static_cast<std::size_t>(i) +
             static_cast<std::size_t>(
                 rng.next_below(all.size() - static_cast<std::size_t>(i)));
    std::swap(all[static_cast<std::size_t>(i)], all[j]);
  }
  all.resize(static_cast<std::size_t>(mtry));
  std::sort(all.begin(), all.end());
  return all;
}

namespace {

// Sorted (value, y) projection of one feature over a row multiset, with
// prefix statistics so any threshold's left-side stats cost one binary
// search. Pairs are sorted by (value, y), which keeps floating-point
// prefix sums independent of the incoming row order.
struct FeatureScan {
  std::vector<double> values;
  std::vector<double> cum_y;
  std::vector<double> cum_yy;
  std::vector<std::vector<std::int64_t>> cum_counts;

  static FeatureScan build(const ClientShard& shard,
                           std::span<const std::uint32_t> rows, int feature,
                           const TaskKind& task) {
    const auto& col = shard.columns[static_cast<std::size_t>(feature)];
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(rows.size());
    for (auto r : rows) pairs.emplace_back(col[r], shard.y[r]);
    std::sort(pairs.begin(), pairs.end());
    FeatureScan scan;
    scan.values.reserve(pairs.size());
    if (task.is_classification()) {
      scan.cum_counts.assign(static_cast<std::size_t>(task.num_categories), {});
      std::vector<std::int64_t> running(
          static_cast<std::size_t>(task.num_categories), 0);
      for (const auto& [x, y] : pairs) {
        scan.values.push_back(x);
        running[static_cast<std::size_t>(std::llround(y))] += 1;
        for (std::size_t c = 0; c < running.size(); ++c) {
          scan.cum_counts[c].push_back(running[c]);
        }
      }
    } else {
      double sy = 0.0, syy = 0.0;
      for (const auto& [x, y] : pairs) {
        scan.values.push_back(x);
        sy += y;
        syy += y * y;
        scan.cum_y.push_back(sy);
        scan.cum_yy.push_back(syy);
      }
    }
    return scan;
  }

  SuffStats left_at(std::size_t pos, const TaskKind& task) const {
    SuffStats s = SuffStats::zero(task);
    if (pos == 0) return s;
    s.n = static_cast<std::int64_t>(pos);
    if (task.is_classification()) {
      for (std::size_t c = 0; c < cum_counts.size(); ++c) {
        s.counts[c] = cum_counts[c][pos - 1];
      }
    } else {
      s.sum_y = cum_y[pos - 1];
      s.sum_yy = cum_yy[pos - 1];
    }
    return s;
  }

  // Stats of rows with value <= threshold.
  SuffStats left_of(double threshold, const TaskKind& task) const {
    auto pos = static_cast<std::size_t>(
        std::upper_bound(values.begin(), values.end(), threshold) -
        values.begin());
    return left_at(pos, task);
  }

  // Best locally attainable gain on this feature, scanning every boundary
  // between distinct values. 0 when no boundary improves.
  double best_gain(const SuffStats& node, ImpurityKind kind,
                   const TaskKind& task) const {
    double best = 0.0;
    for (std::size_t i = 1; i < values.size(); ++i) {
      if (values[i - 1] == values[i]) continue;
      auto gain = split_gain(node, left_at(i, task), kind);
      if (gain && *gain > best) best = *gain;
    }
    return best;
  }
};

}  // namespace

InitReply SimulatedClient::handle_init(const InitRequest& request) {
  task_ = request.task;
  impurity_ = request.impurity;
  mode_ = request.mode;
  sketch_levels_ = request.sketch_levels;
  shortlist_size_ = request.shortlist_size;
  membership_.clear();
  node_stats_.clear();

  auto rows = shard_->y.size();
  for (int t = 0; t < static_cast<int>(request.tree_clients.size()); ++t) {
    const auto& cohort = request.tree_clients[static_cast<std::size_t>(t)];
    if (!std::binary_search(cohort.begin(), cohort.end(), shard_->client_id)) {
      continue;
    }
    TaskRef root{t, NodePath{}};
    if (request.bootstrap) {
      membership_[root] =
          stratified_bootstrap(request.seed, t, shard_->client_id, rows);
    } else {
      std::vector<std::uint32_t> all(rows);
      for (std::size_t i = 0; i < rows; ++i) {
        all[i] = static_cast<std::uint32_t>(i);
      }
      membership_[root] = std::move(all);
    }
  }

  InitReply reply;
  reply.num_rows = static_cast<std::int64_t>(rows);
  reply.num_features = static_cast<int>(shard_->columns.size());
  if (request.gather_ranges) {
    for (const auto& col : shard_->columns) {
      auto [lo, hi] = std::minmax_element(col.begin(), col.end());
      reply.feature_min.push_back(col.empty() ? 0.0 : *lo);
      reply.feature_max.push_back(col.empty() ? 0.0 : *hi);
    }
  }
  return reply;
}

void SimulatedClient::apply_decisions(
    std::span<const SplitDecisionMsg> decisions) {
  for (const auto& decision : decisions) {
    auto it = membership_.find(decision.node);
    if (it == membership_.end()) continue;
    std::vector<std::uint32_t> rows = std::move(it->second);
    membership_.erase(it);
    node_stats_.erase(decision.node);

    const auto& split = decision.split;
    std::vector<std::uint32_t> left, right;
    for (auto r : rows) {
      bool goes_left = false;
      switch (split.kind) {
        case SplitKind::kNumeric:
          goes_left =
              shard_->columns[static_cast<std::size_t>(split.feature)][r] <=
              split.threshold;
          break;
        case SplitKind::kClientSet:
          goes_left = std::binary_search(split.left_set.begin(),
                                         split.left_set.end(),
                                         shard_->client_id);
          break;
        case SplitKind::kCategorical: {
          auto v = static_cast<int>(std::llround(
              shard_->columns[static_cast<std::size_t>(split.feature)][r]));
          goes_left = std::binary_search(split.left_set.begin(),
                                         split.left_set.end(), v);
          break;
        }
      }
      (goes_left ? left : right).push_back(r);
    }
    TaskRef lref{decision.node.tree, decision.node.path.child(false)};
    TaskRef rref{decision.node.tree, decision.node.path.child(true)};
    if (!left.empty()) membership_[lref] = std::move(left);
    if (!right.empty()) membership_[rref] = std::move(right);
  }
}

const std::vector<std::uint32_t>* SimulatedClient::rows_of(
    const TaskRef& ref) const {
  auto it = membership_.find(ref);
  if (it == membership_.end() || it->second.empty()) return nullptr;
  return &it->second;
}

SuffStats SimulatedClient::stats_of(const TaskRef& ref,
                                    std::span<const std::uint32_t> rows) {
  auto it = node_stats_.find(ref);
  if (it != node_stats_.end()) return it->second;
  SuffStats s = SuffStats::zero(task_);
  for (auto r : rows) s.accumulate(shard_->y[r], task_);
  node_stats_.emplace(ref, s);
  return s;
}

SketchReply SimulatedClient::handle_sketch(const SketchRequest& request) {
  apply_decisions(request.decisions);
  SketchReply reply;
  reply.client_id = shard_->client_id;
  for (const auto& task : request.tasks) {
    const auto* rows = rows_of(task.node);
    if (rows == nullptr) continue;
    TaskSketches out;
    out.node = task.node;
    out.node_stats = stats_of(task.node, *rows);
    for (int feature : task.features) {
      std::vector<double> values;
      values.reserve(rows->size());
      const auto& col = shard_->columns[static_cast<std::size_t>(feature)];
      for (auto r : *rows) values.push_back(col[r]);
      out.sketches.push_back(build_sketch(values, sketch_levels_));
    }
    reply.tasks.push_back(std::move(out));
  }
  return reply;
}

ShortlistReply SimulatedClient::handle_shortlist(
    const ShortlistRequest& request) {
  apply_decisions(request.decisions);
  ShortlistReply reply;
  reply.client_id = shard_->client_id;
  for (const auto& task : request.tasks) {
    const auto* rows = rows_of(task.node);
    if (rows == nullptr) continue;
    SuffStats node = stats_of(task.node, *rows);
    std::vector<std::pair<double, int>> ranked;  // (-gain, feature)
    ranked.reserve(task.features.size());
    for (int feature : task.features) {
      auto scan = FeatureScan::build(*shard_, *rows, feature, task_);
      ranked.emplace_back(-scan.best_gain(node, impurity_, task_), feature);
    }
    std::sort(ranked.begin(), ranked.end());
    auto keep = std::min<std::size_t>(
        static_cast<std::size_t>(shortlist_size_), ranked.size());
    TaskShortlist out;
    out.node = task.node;
    for (std::size_t i = 0; i < keep; ++i) {
      out.features.push_back(ranked[i].second);
      out.gains.push_back(-ranked[i].first);
    }
    reply.tasks.push_back(std::move(out));
  }
  return reply;
}

EvalReply SimulatedClient::handle_eval(const EvalRequest& request) {
  EvalReply reply;
  reply.client_id = shard_->client_id;
  for (const auto& batch : request.tasks) {
    const auto* rows = rows_of(batch.node);
    if (rows == nullptr) continue;
    TaskEvaluation out;
    out.node = batch.node;
    SuffStats node;
    if (mode_ == Mode::kAvgImpTopL) node = stats_of(batch.node, *rows);
    std::map<int, FeatureScan> scans;
    for (const auto& cand : batch.candidates) {
      if (cand.kind != SplitKind::kNumeric) {
        throw ProtocolError("clients only evaluate numeric candidates");
      }
      auto it = scans.find(cand.feature);
      if (it == scans.end()) {
        it = scans
                 .emplace(cand.feature,
                          FeatureScan::build(*shard_, *rows, cand.feature, task_))
                 .first;
      }
      SuffStats left = it->second.left_of(cand.threshold, task_);
      if (mode_ == Mode::kAvgImpTopL) {
        auto gain = split_gain(node, left, impurity_);
        out.local_gains.push_back(gain.value_or(0.0));
      } else {
        out.left_stats.push_back(std::move(left));
      }
    }
    reply.tasks.push_back(std::move(out));
  }
  return reply;
}

SummaryReply SimulatedClient::handle_summary(const SummaryRequest& request) {
  apply_decisions(request.decisions);
  SummaryReply reply;
  reply.client_id = shard_->client_id;
  for (const auto& node : request.nodes) {
    const auto* rows = rows_of(node);
    if (rows == nullptr) continue;
    reply.nodes.push_back({node, stats_of(node, *rows)});
  }
  return reply;
}

ValueReply SimulatedClient::handle_values(const ValueRequest& request) {
  apply_decisions(request.decisions);
  ValueReply reply;
  reply.client_id = shard_->client_id;
  for (const auto& task : request.tasks) {
    const auto* rows = rows_of(task.node);
    if (rows == nullptr) continue;
    TaskValues out;
    out.node = task.node;
    out.node_stats = stats_of(task.node, *rows);
    for (int feature : task.features) {
      std::vector<double> values;
      values.reserve(rows->size());
      const auto& col = shard_->columns[static_cast<std::size_t>(feature)];
      for (auto r : *rows) values.push_back(col[r]);
      std::sort(values.begin(), values.end());
      out.values.push_back(std::move(values));
    }
    reply.tasks.push_back(std::move(out));
  }
  return reply;
}

Trainer::Trainer(std::span<const ClientShard> shards, ForestConfig config)
    : cfg_(std::move(config)) {
  cfg_.validate();
  shards_.assign(shards.begin(), shards.end());
  std::sort(shards_.begin(), shards_.end(),
            [](const ClientShard& a, const ClientShard& b) {
              return a.client_id < b.client_id;
            });
  validate_shards(shards_, cfg_.task);
  impurity_ = cfg_.resolved_impurity();
  d_ = static_cast<int>(shards_.front().columns.size());
  stat_size_ = cfg_.task.is_classification() ? cfg_.task.num_categories : 3;
  mtry_ = cfg_.resolved_mtry(d_);
  clients_.reserve(shards_.size());
  for (const auto& shard : shards_) clients_.emplace_back(&shard);
}

void Trainer::run_init() {
  std::vector<int> ids;
  ids.reserve(shards_.size());
  for (const auto& shard : shards_) ids.push_back(shard.client_id);

  InitRequest request;
  request.task = cfg_.task;
  request.impurity = impurity_;
  request.mode = cfg_.mode;
  request.sketch_levels = cfg_.sketch_levels;
  request.shortlist_size = cfg_.shortlist_size;
  request.trees = cfg_.trees;
  request.bootstrap = cfg_.bootstrap;
  request.seed = cfg_.seed;
  request.gather_ranges = cfg_.mode == Mode::kFedHistogram;
  cohorts_.clear();
  for (int t = 0; t < cfg_.trees; ++t) {
    cohorts_.push_back(subsample_clients(ids, cfg_.client_fraction, cfg_.seed, t));
  }
  request.tree_clients = cohorts_;

  // Configuration distribution; not one of the synchronized training
  // rounds, though its scalars are still accounted.
  std::vector<double> fmin, fmax;
  std::int64_t total_rows = 0;
  for (auto& client : clients_) {
    InitReply reply = client.handle_init(request);
    if (reply.num_features != d_) {
      throw ProtocolError("client feature count mismatch");
    }
    total_rows += reply.num_rows;
    std::int64_t up = 2;
    if (request.gather_ranges) {
      up += 2 * d_;
      if (fmin.empty()) {
        fmin = reply.feature_min;
        fmax = reply.feature_max;
      } else {
        for (int j = 0; j < d_; ++j) {
          auto k = static_cast<std::size_t>(j);
          fmin[k] = std::min(fmin[k], reply.feature_min[k]);
          fmax[k] = std::max(fmax[k], reply.feature_max[k]);
        }
      }
    }
    int in_cohorts = 0;
    for (const auto& cohort : cohorts_) {
      if (std::binary_search(cohort.begin(), cohort.end(), client.client_id())) {
        ++in_cohorts;
      }
    }
    ledger_.record(-1, NodePath{}, Phase::kInit, up, 10 + in_cohorts, 1);
  }
  if (total_rows <= 0) throw DataError("no training rows across clients");

  if (cfg_.mode == Mode::kFedHistogram) {
    // Fixed per-feature grids reused at every node: the interior edges of
    // an equal-width partition of the global range into B bins.
    histogram_grid_.assign(static_cast<std::size_t>(d_), {});
    for (int j = 0; j < d_; ++j) {
      auto k = static_cast<std::size_t>(j);
      double lo = fmin[k], hi = fmax[k];
      if (!(hi > lo)) continue;
      int bins = cfg_.sketch_levels;
      for (int b = 1; b < bins; ++b) {
        histogram_grid_[k].push_back(
            lo + (hi - lo) * (static_cast<double>(b) / static_cast<double>(bins)));
      }
    }
  }
}

void Trainer::finalize_leaf(Build& node) {
  node.is_leaf = true;
  node.has_split = false;
  node.pending_summary = false;
}

void Trainer::demote_parent(const TaskRef& child, std::vector<TaskRef>& tasks) {
  TaskRef parent_ref{child.tree, child.path.parent()};
  Build& parent = nodes_.at(parent_ref);
  finalize_leaf(parent);
  parent.n_left = 0;
  parent.n_right = 0;
  TaskRef sibling{child.tree,
                  parent_ref.path.child(!child.path.last_direction())};
  for (const auto& ref : {child, sibling}) {
    nodes_.erase(ref);
    std::erase(tasks, ref);
  }
}

Forest Trainer::fit() {
  run_init();
  nodes_.clear();
  frontier_.clear();
  pending_decisions_.clear();
  for (int t = 0; t < cfg_.trees; ++t) {
    TaskRef root{t, NodePath{}};
    nodes_.emplace(root, Build{});
    frontier_.push_back(root);
  }
  levels_run_ = 0;
  for (int level = 0; level < cfg_.max_depth && !frontier_.empty(); ++level) {
    ++levels_run_;
    frontier_ = run_level(level);
  }
  run_summary_round();
  return assemble();
}

std::vector<TaskRef> Trainer::run_level(int level) {
  std::vector<TaskRef> tasks = frontier_;
  const bool avgimp = cfg_.mode == Mode::kAvgImpTopL;
  const bool verify = cfg_.mode == Mode::kVerifyMidpoints;
  const bool histogram = cfg_.mode == Mode::kFedHistogram;

  // Feature subsets are fixed per task before any client contact.
  std::map<TaskRef, std::vector<int>> subsets;
  for (const auto& ref : tasks) {
    subsets[ref] = feature_subset(cfg_.seed, ref.tree, ref.path, d_, mtry_);
  }

  auto broadcast_cost = [&](const std::vector<SplitDecisionMsg>& decisions) {
    for (const auto& decision : decisions) {
      std::int64_t payload = 3;
      switch (decision.split.kind) {
        case SplitKind::kNumeric:
          payload += 2;
          break;
        case SplitKind::kClientSet:
          payload += 1 + static_cast<std::int64_t>(decision.split.left_set.size());
          break;
        case SplitKind::kCategorical:
          payload += 2 + static_cast<std::int64_t>(decision.split.left_set.size());
          break;
      }
      ledger_.record(decision.node.tree, decision.node.path, Phase::kDecision,
                     0, payload * cohort_size(decision.node.tree), 0);
    }
  };

  std::map<TaskRef, std::map<int, SuffStats>> per_client;
  std::map<TaskRef, std::vector<std::vector<QuantileSketch>>> sketch_rows;
  std::map<TaskRef, std::vector<std::vector<double>>> merged_values;

  // The averaged mode narrows each subset to the union of client
  // shortlists before any sketches move; exact modes sketch the whole
  // subset directly.
  if (avgimp) {
    ShortlistRequest request;
    request.decisions = std::move(pending_decisions_);
    pending_decisions_.clear();
    for (const auto& ref : tasks) {
      ledger_.record(ref.tree, ref.path, Phase::kTask, 0,
                     (4 + static_cast<std::int64_t>(subsets[ref].size())) *
                         cohort_size(ref.tree),
                     0);
      request.tasks.push_back({ref, subsets[ref]});
    }
    broadcast_cost(request.decisions);
    ledger_.count_round();
    std::map<TaskRef, std::vector<std::vector<int>>> lists;
    for (auto& client : clients_) {
      ShortlistReply reply = client.handle_shortlist(request);
      for (auto& task : reply.tasks) {
        ledger_.record(task.node.tree, task.node.path, Phase::kShortlist,
                       2 * static_cast<std::int64_t>(task.features.size()), 0,
                       1);
        lists[task.node].push_back(std::move(task.features));
      }
    }
    for (auto& [ref, client_lists] : lists) {
      subsets[ref] = merge_shortlists(client_lists);
    }
  }

  {
    // Stats move here in every mode; exact modes add per-feature sketches
    // (raw sorted values in the verification mode), the histogram mode
    // needs nothing beyond the stats.
    SketchRequest request;
    ValueRequest value_request;
    request.decisions = std::move(pending_decisions_);
    pending_decisions_.clear();
    for (const auto& ref : tasks) {
      std::vector<int> features =
          histogram ? std::vector<int>{} : subsets[ref];
      ledger_.record(ref.tree, ref.path, Phase::kTask, 0,
                     (4 + static_cast<std::int64_t>(features.size())) *
                         cohort_size(ref.tree),
                     0);
      if (verify) {
        value_request.tasks.push_back({ref, std::move(features)});
      } else {
        request.tasks.push_back({ref, std::move(features)});
      }
    }
    broadcast_cost(request.decisions);
    if (verify) value_request.decisions = std::move(request.decisions);
    ledger_.count_round();

    for (auto& client : clients_) {
      if (verify) {
        ValueReply reply = client.handle_values(value_request);
        for (auto& task : reply.tasks) {
          per_client[task.node][reply.client_id] = task.node_stats;
          auto& merged = merged_values[task.node];
          if (merged.empty()) merged.resize(task.values.size());
          std::int64_t up = stat_size_;
          for (std::size_t f = 0; f < task.values.size(); ++f) {
            up += static_cast<std::int64_t>(task.values[f].size());
            auto& dst = merged[f];
            auto mid = static_cast<std::ptrdiff_t>(dst.size());
            dst.insert(dst.end(), task.values[f].begin(), task.values[f].end());
            std::inplace_merge(dst.begin(), dst.begin() + mid, dst.end());
          }
          ledger_.record(task.node.tree, task.node.path, Phase::kSketch, up,
                         0, 1);
        }
      } else {
        SketchReply reply = client.handle_sketch(request);
        for (auto& task : reply.tasks) {
          per_client[task.node][reply.client_id] = task.node_stats;
          std::int64_t up = stat_size_;
          for (const auto& sk : task.sketches) {
            up += static_cast<std::int64_t>(sk.breakpoints.size());
          }
          sketch_rows[task.node].push_back(std::move(task.sketches));
          ledger_.record(task.node.tree, task.node.path, Phase::kSketch, up,
                         0, 1);
        }
      }
    }
  }

  // Aggregate node stats. Exact modes already know each node's count from
  // the decision that created it and only cross-check; the averaged mode
  // learns child sizes here, one level late, and reverts any split whose
  // child came up short.
  for (const auto& ref : std::vector<TaskRef>(tasks)) {
    auto nit = nodes_.find(ref);
    if (nit == nodes_.end()) continue;  // dropped when its sibling demoted
    Build& build = nit->second;
    SuffStats total = SuffStats::zero(cfg_.task);
    if (auto pc = per_client.find(ref); pc != per_client.end()) {
      for (const auto& [id, stats] : pc->second) total = add_stats(total, stats);
    }
    if (build.stats_known) {
      if (total.n != build.stats.n) {
        throw ProtocolError("node count drifted between rounds");
      }
      continue;
    }
    build.stats = total;
    build.stats_known = true;
    if (ref.path.depth > 0) {
      Build& parent = nodes_.at({ref.tree, ref.path.parent()});
      (ref.path.last_direction() ? parent.n_right : parent.n_left) = total.n;
      if (total.n < cfg_.min_leaf) {
        demote_parent(ref, tasks);
      }
    }
  }

  // Stopping rules that need no candidate traffic.
  for (const auto& ref : std::vector<TaskRef>(tasks)) {
    Build& build = nodes_.at(ref);
    if (build.stats.n < 2 * cfg_.min_leaf ||
        impurity_raw(build.stats, impurity_) <= 0.0) {
      finalize_leaf(build);
      std::erase(tasks, ref);
    }
  }

  // Candidate thresholds per task. Pooled CDFs are kept around; the
  // averaged mode reads child-size estimates off them.
  std::map<TaskRef, std::vector<SplitCandidate>> numeric;
  std::map<TaskRef, std::vector<PooledCdf>> pooled;
  for (const auto& ref : tasks) {
    auto& cands = numeric[ref];
    const auto& features = subsets[ref];
    if (histogram) {
      for (int feature : features) {
        for (double t : histogram_grid_[static_cast<std::size_t>(feature)]) {
          cands.push_back(SplitCandidate::numeric(feature, t));
        }
      }
      continue;
    }
    if (verify) {
      const auto& merged = merged_values[ref];
      for (std::size_t f = 0; f < features.size(); ++f) {
        for (double t : exact_midpoints(merged[f])) {
          cands.push_back(SplitCandidate::numeric(features[f], t));
        }
      }
      continue;
    }
    const auto& rows = sketch_rows[ref];
    auto& cdfs = pooled[ref];
    for (std::size_t f = 0; f < features.size(); ++f) {
      std::vector<QuantileSketch> column;
      column.reserve(rows.size());
      for (const auto& row : rows) column.push_back(row[f]);
      cdfs.emplace_back(std::move(column));
      for (double t : candidate_thresholds(cdfs.back(), cfg_.sketch_levels,
                                           cfg_.dedup_candidates)) {
        cands.push_back(SplitCandidate::numeric(features[f], t));
      }
    }
  }

  // Evaluation contact. The histogram mode folds it into the same round
  // as the stats request above; the other modes open a second round.
  std::map<TaskRef, std::map<int, std::vector<SuffStats>>> left_stats;
  std::map<TaskRef, std::map<int, std::vector<double>>> gain_rows;
  {
    EvalRequest request;
    for (const auto& ref : tasks) {
      if (numeric[ref].empty()) continue;
      ledger_.record(ref.tree, ref.path, Phase::kCandidates, 0,
                     (4 + 2 * static_cast<std::int64_t>(numeric[ref].size())) *
                         cohort_size(ref.tree),
                     0);
      request.tasks.push_back({ref, numeric[ref]});
    }
    if (!request.tasks.empty()) {
      if (!histogram) ledger_.count_round();
      for (auto& client : clients_) {
        EvalReply reply = client.handle_eval(request);
        for (auto& task : reply.tasks) {
          std::int64_t up;
          if (avgimp) {
            up = static_cast<std::int64_t>(task.local_gains.size());
            gain_rows[task.node][reply.client_id] = std::move(task.local_gains);
          } else {
            up = static_cast<std::int64_t>(task.left_stats.size()) * stat_size_;
            left_stats[task.node][reply.client_id] = std::move(task.left_stats);
          }
          ledger_.record(task.node.tree, task.node.path, Phase::kEvaluate, up,
                         0, 1);
        }
      }
    }
  }

  // Scoring and decisions.
  std::vector<TaskRef> next_frontier;
  for (const auto& ref : tasks) {
    Build& build = nodes_.at(ref);
    std::vector<ScoredSplit> scored;
    const auto& cands = numeric[ref];

    if (avgimp) {
      std::map<int, std::int64_t> node_counts;
      for (const auto& [id, stats] : per_client[ref]) node_counts[id] = stats.n;
      for (std::size_t i = 0; i < cands.size(); ++i) {
        std::map<int, double> gains;
        for (const auto& [id, row] : gain_rows[ref]) gains[id] = row[i];
        auto avg = average_local_gain(gains, node_counts);
        if (!avg) continue;
        ScoredSplit s;
        s.candidate = cands[i];
        s.gain = *avg;
        s.exact = false;
        // Child sizes are estimated off the pooled CDF; the true sizes
        // surface next level and may demote this node.
        const auto& features = subsets[ref];
        auto f = static_cast<std::size_t>(
            std::lower_bound(features.begin(), features.end(),
                             cands[i].feature) -
            features.begin());
        auto left = std::llround(pooled[ref][f].cdf(cands[i].threshold) *
                                 static_cast<double>(build.stats.n));
        s.left_count_estimate = std::clamp<std::int64_t>(left, 0, build.stats.n);
        s.right_count_estimate = build.stats.n - s.left_count_estimate;
        scored.push_back(std::move(s));
      }
    } else {
      for (std::size_t i = 0; i < cands.size(); ++i) {
        std::map<int, SuffStats> lefts;
        for (const auto& [id, row] : left_stats[ref]) lefts[id] = row[i];
        auto s = evaluate_exact(build.stats, lefts, impurity_);
        if (!s) continue;
        s->candidate = cands[i];
        scored.push_back(std::move(*s));
      }
      if (cfg_.include_h && per_client[ref].size() >= 2) {
        for (auto& cand : client_set_candidates(per_client[ref], cfg_.task)) {
          SuffStats left = SuffStats::zero(cfg_.task);
          for (const auto& [id, stats] : per_client[ref]) {
            if (std::binary_search(cand.left_set.begin(), cand.left_set.end(),
                                   id)) {
              left = add_stats(left, stats);
            }
          }
          auto gain = split_gain(build.stats, left, impurity_);
          if (!gain) continue;
          ScoredSplit s;
          s.candidate = std::move(cand);
          s.gain = *gain;
          s.left = left;
          s.right = sub_stats(build.stats, left);
          s.left_count_estimate = s.left.n;
          s.right_count_estimate = s.right.n;
          scored.push_back(std::move(s));
        }
      }
    }

    auto best = select_best(scored, cfg_.min_leaf, cfg_.min_gain);
    if (!best) {
      finalize_leaf(build);
      continue;
    }
    record_decision(ref, build, *best, level, next_frontier);
  }
  return next_frontier;
}

void Trainer::record_decision(const TaskRef& ref, Build& node,
                              const ScoredSplit& best, int level,
                              std::vector<TaskRef>& next_frontier) {
  node.has_split = true;
  node.is_leaf = false;
  node.split = best.candidate;
  node.gain = best.gain;
  pending_decisions_.push_back({ref, best.candidate});

  TaskRef lref{ref.tree, ref.path.child(false)};
  TaskRef rref{ref.tree, ref.path.child(true)};
  const bool last_level = level + 1 >= cfg_.max_depth;

  if (best.exact) {
    node.n_left = best.left.n;
    node.n_right = best.right.n;
    auto spawn = [&](const TaskRef& child_ref, const SuffStats& stats) {
      Build child;
      child.stats = stats;
      child.stats_known = true;
      if (last_level || stats.n < 2 * cfg_.min_leaf ||
          impurity_raw(stats, impurity_) <= 0.0) {
        finalize_leaf(child);
      } else {
        next_frontier.push_back(child_ref);
      }
      nodes_.emplace(child_ref, std::move(child));
    };
    spawn(lref, best.left);
    spawn(rref, best.right);
  } else {
    node.n_left = 0;
    node.n_right = 0;
    auto spawn = [&](const TaskRef& child_ref) {
      Build child;
      if (last_level) {
        child.is_leaf = true;
        child.pending_summary = true;
      } else {
        next_frontier.push_back(child_ref);
      }
      nodes_.emplace(child_ref, std::move(child));
    };
    spawn(lref);
    spawn(rref);
  }
}

void Trainer::run_summary_round() {
  std::vector<TaskRef> wanted;
  for (const auto& [ref, build] : nodes_) {
    if (build.pending_summary) wanted.push_back(ref);
  }
  if (wanted.empty()) return;

  SummaryRequest request;
  request.decisions = std::move(pending_decisions_);
  pending_decisions_.clear();
  request.nodes = wanted;
  for (const auto& ref : wanted) {
    ledger_.record(ref.tree, ref.path, Phase::kSummary, 0,
                   3 * cohort_size(ref.tree), 0);
  }
  for (const auto& decision : request.decisions) {
    // The decisions that created the pending leaves still have to reach
    // clients; only numeric splits can be pending here.
    ledger_.record(decision.node.tree, decision.node.path, Phase::kDecision,
                   0, 5 * cohort_size(decision.node.tree), 0);
  }
  ledger_.count_round();

  std::map<TaskRef, SuffStats> totals;
  for (auto& client : clients_) {
    SummaryReply reply = client.handle_summary(request);
    for (auto& task : reply.nodes) {
      auto it = totals.find(task.node);
      if (it == totals.end()) {
        totals.emplace(task.node, task.node_stats);
      } else {
        it->second = add_stats(it->second, task.node_stats);
      }
      ledger_.record(task.node.tree, task.node.path, Phase::kSummary,
                     stat_size_, 0, 1);
    }
  }

  for (const auto& ref : wanted) {
    auto nit = nodes_.find(ref);
    if (nit == nodes_.end()) continue;  // dropped when its sibling demoted
    auto tit = totals.find(ref);
    SuffStats stats =
        tit == totals.end() ? SuffStats::zero(cfg_.task) : tit->second;
    if (stats.n < cfg_.min_leaf) {
      std::vector<TaskRef> none;
      demote_parent(ref, none);
      continue;
    }
    Build& build = nit->second;
    build.stats = stats;
    build.stats_known = true;
    finalize_leaf(build);
    Build& parent = nodes_.at({ref.tree, ref.path.parent()});
    (ref.path.last_direction() ? parent.n_right : parent.n_left) = stats.n;
  }
}

Forest Trainer::assemble() const {
  Forest forest;
  forest.task = cfg_.task;
  forest.impurity = impurity_;
  forest.num_features = d_;
  forest.config = cfg_;
  forest.ledger.scalars_up = ledger_.total_up();
  forest.ledger.scalars_down = ledger_.total_down();
  forest.ledger.rounds = ledger_.rounds();
  forest.ledger.levels = levels_run_;

  for (int t = 0; t < cfg_.trees; ++t) {
    Tree tree;
    // Preorder emission; children always land after their parent.
    auto emit = [&](auto&& self, const TaskRef& ref) -> std::int32_t {
      const Build& build = nodes_.at(ref);
      auto index = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      if (build.has_split) {
        auto& node = tree.nodes[static_cast<std::size_t>(index)];
        node.leaf = false;
        node.split = build.split;
        node.n_left = build.n_left;
        node.n_right = build.n_right;
        auto left = self(self, TaskRef{ref.tree, ref.path.child(false)});
        auto right = self(self, TaskRef{ref.tree, ref.path.child(true)});
        tree.nodes[static_cast<std::size_t>(index)].left = left;
        tree.nodes[static_cast<std::size_t>(index)].right = right;
      } else {
        if (!build.stats_known) {
          throw ProtocolError("leaf finalized without statistics");
        }
        auto& node = tree.nodes[static_cast<std::size_t>(index)];
        node.leaf = true;
        node.prediction = leaf_value(build.stats, cfg_.task);
        node.stats = build.stats;
      }
      return index;
    };
    emit(emit, TaskRef{t, NodePath{}});
    forest.trees.push_back(std::move(tree));
  }
  return forest;
}

Forest fit_forest(std::span<const ClientShard> shards,
                  const ForestConfig& config) {
  Trainer trainer(shards, config);
  return trainer.fit();
}

}  // namespace fedforest
