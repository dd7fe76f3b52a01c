#include "fedforest/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "fedforest/federation.hpp"
#include "fedforest/split.hpp"

namespace fedforest {

namespace {

// One pooled training row: which shard it lives in and where. Node row
// lists stay sorted by (shard, row), which groups each client's rows
// contiguously; statistics are accumulated per client and combined in
// client order, the same association the federated aggregation uses, so
// gains agree bit for bit rather than merely to rounding.
struct RowRef {
  int shard;          // index into the sorted shard array
  std::uint32_t row;  // row within the shard
};

class CentralizedBuilder {
 public:
  CentralizedBuilder(std::span<const ClientShard> shards, ForestConfig config,
                     bool with_h)
      : cfg_(std::move(config)), with_h_(with_h) {
    cfg_.validate();
    shards_.assign(shards.begin(), shards.end());
    std::sort(shards_.begin(), shards_.end(),
              [](const ClientShard& a, const ClientShard& b) {
                return a.client_id < b.client_id;
              });
    validate_shards(shards_, cfg_.task);
    impurity_ = cfg_.resolved_impurity();
    d_ = static_cast<int>(shards_.front().num_features());
    mtry_ = cfg_.resolved_mtry(static_cast<std::size_t>(d_));
  }

  Forest fit() {
    Forest forest;
    forest.task = cfg_.task;
    forest.impurity = impurity_;
    forest.num_features = static_cast<std::size_t>(d_);
    forest.config = cfg_;

    std::vector<int> ids;
    for (const auto& s : shards_) ids.push_back(s.client_id);

    for (int t = 0; t < cfg_.trees; ++t) {
      const auto cohort = subsample_clients(ids, cfg_.client_fraction, cfg_.seed, t);
      std::vector<RowRef> rows;
      for (int s = 0; s < static_cast<int>(shards_.size()); ++s) {
        const auto& shard = shards_[static_cast<std::size_t>(s)];
        if (!std::binary_search(cohort.begin(), cohort.end(), shard.client_id)) {
          continue;
        }
        if (cfg_.bootstrap) {
          for (auto r : stratified_bootstrap(cfg_.seed, t, shard.client_id,
                                             shard.num_rows())) {
            rows.push_back({s, r});
          }
        } else {
          for (std::uint32_t r = 0; r < shard.num_rows(); ++r) {
            rows.push_back({s, r});
          }
        }
      }

      Tree tree;
      h_rank_.clear();
      if (with_h_) {
        tree.h_root_order = fisher_order(grouped(rows), cfg_.task);
        for (int i = 0; i < static_cast<int>(tree.h_root_order.size()); ++i) {
          h_rank_[tree.h_root_order[static_cast<std::size_t>(i)]] = i;
        }
      }
      grow(tree, t, NodePath{}, rows);
      forest.trees.push_back(std::move(tree));
    }
    return forest;
  }

 private:
  // Per-client statistics of a row list (rows grouped by shard).
  std::map<int, SuffStats> grouped(std::span<const RowRef> rows) const {
    std::map<int, SuffStats> out;
    std::size_t i = 0;
    while (i < rows.size()) {
      const int s = rows[i].shard;
      const auto& shard = shards_[static_cast<std::size_t>(s)];
      SuffStats stats = SuffStats::zero(cfg_.task);
      while (i < rows.size() && rows[i].shard == s) {
        stats.accumulate(shard.y[rows[i].row], cfg_.task);
        ++i;
      }
      out.emplace(shard.client_id, std::move(stats));
    }
    return out;
  }

  static SuffStats combine(const std::map<int, SuffStats>& per_client,
                           const TaskKind& task) {
    SuffStats total = SuffStats::zero(task);
    for (const auto& [id, stats] : per_client) total = add_stats(total, stats);
    return total;
  }

  // Value of the feature for a row; index d_ is the encoded client id.
  double value_of(const RowRef& r, int feature) const {
    const auto& shard = shards_[static_cast<std::size_t>(r.shard)];
    if (feature == d_) {
      return static_cast<double>(h_rank_.at(shard.client_id));
    }
    return shard.columns[static_cast<std::size_t>(feature)][r.row];
  }

  // Per-client prefix statistics of one feature, kept in client order.
  // Prefixes are accumulated over (value, y)-sorted rows, the same
  // association the client-side scans use, and combined client by client.
  struct ClientScan {
    std::vector<double> values;  // sorted
    std::vector<SuffStats> prefix;  // prefix[i] = stats of values[0..i]
  };

  std::vector<ClientScan> scans_of(std::span<const RowRef> rows, int feature) const {
    std::vector<ClientScan> scans;
    std::size_t i = 0;
    while (i < rows.size()) {
      const int s = rows[i].shard;
      const auto& shard = shards_[static_cast<std::size_t>(s)];
      std::vector<std::pair<double, double>> pairs;
      while (i < rows.size() && rows[i].shard == s) {
        pairs.emplace_back(value_of(rows[i], feature), shard.y[rows[i].row]);
        ++i;
      }
      std::sort(pairs.begin(), pairs.end());
      ClientScan scan;
      scan.values.reserve(pairs.size());
      scan.prefix.reserve(pairs.size());
      SuffStats running = SuffStats::zero(cfg_.task);
      for (const auto& [x, y] : pairs) {
        scan.values.push_back(x);
        running.accumulate(y, cfg_.task);
        scan.prefix.push_back(running);
      }
      scans.push_back(std::move(scan));
    }
    return scans;
  }

  SuffStats left_of(const std::vector<ClientScan>& scans, double threshold) const {
    SuffStats left = SuffStats::zero(cfg_.task);
    for (const auto& scan : scans) {
      const auto end = static_cast<std::size_t>(
          std::upper_bound(scan.values.begin(), scan.values.end(), threshold) -
          scan.values.begin());
      if (end == 0) continue;
      left = add_stats(left, scan.prefix[end - 1]);
    }
    return left;
  }

  void grow(Tree& tree, int t, NodePath path, std::vector<RowRef>& rows) {
    const auto index = tree.nodes.size();
    tree.nodes.emplace_back();

    const auto per_client = grouped(rows);
    const SuffStats stats = combine(per_client, cfg_.task);

    const bool at_depth = path.depth >= static_cast<std::uint32_t>(cfg_.max_depth);
    if (at_depth || stats.n < 2 * cfg_.min_leaf ||
        impurity_raw(stats, impurity_) <= 0.0) {
      make_leaf(tree.nodes[index], stats);
      return;
    }

    std::vector<int> features = feature_subset(cfg_.seed, t, path, d_, mtry_);
    if (with_h_) features.push_back(d_);

    std::vector<ScoredSplit> scored;
    for (int feature : features) {
      const auto scans = scans_of(rows, feature);
      std::vector<double> values;
      for (const auto& scan : scans) {
        values.insert(values.end(), scan.values.begin(), scan.values.end());
      }
      std::sort(values.begin(), values.end());
      for (double threshold : exact_midpoints(values)) {
        SuffStats left = left_of(scans, threshold);
        auto gain = split_gain(stats, left, impurity_);
        if (!gain) continue;
        ScoredSplit s;
        s.candidate = SplitCandidate::numeric(feature, threshold);
        s.gain = *gain;
        s.right = sub_stats(stats, left);
        s.left = std::move(left);
        s.left_count_estimate = s.left.n;
        s.right_count_estimate = s.right.n;
        scored.push_back(std::move(s));
      }
    }

    const auto best = select_best(scored, cfg_.min_leaf, cfg_.min_gain);
    if (!best) {
      make_leaf(tree.nodes[index], stats);
      return;
    }

    std::vector<RowRef> left_rows, right_rows;
    for (const RowRef& r : rows) {
      const bool goes_left = value_of(r, best->candidate.feature) <=
                             best->candidate.threshold;
      (goes_left ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    tree.nodes[index].leaf = false;
    tree.nodes[index].split = best->candidate;
    tree.nodes[index].n_left = best->left.n;
    tree.nodes[index].n_right = best->right.n;
    const auto left_index = static_cast<std::int32_t>(tree.nodes.size());
    grow(tree, t, path.child(0), left_rows);
    const auto right_index = static_cast<std::int32_t>(tree.nodes.size());
    grow(tree, t, path.child(1), right_rows);
    tree.nodes[index].left = left_index;
    tree.nodes[index].right = right_index;
  }

  void make_leaf(TreeNode& node, const SuffStats& stats) const {
    node.leaf = true;
    node.prediction = leaf_value(stats, cfg_.task);
    node.stats = stats;
  }

  std::vector<ClientShard> shards_;
  ForestConfig cfg_;
  bool with_h_;
  ImpurityKind impurity_ = ImpurityKind::kVariance;
  int d_ = 0;
  int mtry_ = 0;
  std::map<int, int> h_rank_;  // client id -> root-order rank, current tree
};

}  // namespace

Forest fit_centralized(std::span<const ClientShard> shards, const ForestConfig& config,
                       bool with_h) {
  CentralizedBuilder builder(shards, config, with_h);
  return builder.fit();
}

const Forest& LocalModels::for_client(int id) const {
  const auto it = std::lower_bound(client_ids.begin(), client_ids.end(), id);
  if (it == client_ids.end() || *it != id) {
    throw DataError("no local model for client " + std::to_string(id));
  }
  return forests[static_cast<std::size_t>(it - client_ids.begin())];
}

LocalModels fit_local(std::span<const ClientShard> shards, const ForestConfig& config) {
  std::vector<const ClientShard*> ordered;
  for (const auto& s : shards) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const ClientShard* a, const ClientShard* b) {
              return a->client_id < b->client_id;
            });

  LocalModels models;
  for (const ClientShard* shard : ordered) {
    ClientShard local = *shard;
    local.client_id = 0;
    models.client_ids.push_back(shard->client_id);
    models.forests.push_back(
        fit_centralized(std::span<const ClientShard>(&local, 1), config, false));
  }
  return models;
}

Forest local_ensemble(const LocalModels& models) {
  if (models.forests.empty()) throw DataError("no local models to pool");
  Forest pooled = models.forests.front();
  for (std::size_t i = 1; i < models.forests.size(); ++i) {
    for (const auto& tree : models.forests[i].trees) {
      pooled.trees.push_back(tree);
    }
  }
  return pooled;
}

std::vector<double> predict_own_client(const LocalModels& models, const Dataset& data) {
  const Forest pooled = local_ensemble(models);
  std::vector<double> out;
  out.reserve(data.num_rows());
  for (std::size_t i = 0; i < data.num_rows(); ++i) {
    const auto x = data.row(i);
    const int id = data.client_id[i];
    const auto it = std::lower_bound(models.client_ids.begin(),
                                     models.client_ids.end(), id);
    if (it != models.client_ids.end() && *it == id) {
      const auto& forest =
          models.forests[static_cast<std::size_t>(it - models.client_ids.begin())];
      out.push_back(predict(forest, x));
    } else {
      out.push_back(predict(pooled, x));
    }
  }
  return out;
}

}  // namespace fedforest
