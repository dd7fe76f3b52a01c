#include "fedforest/diagnostics.hpp"

#include <algorithm>
#include <vector>

#include "fedforest/federation.hpp"
#include "fedforest/metrics.hpp"
#include "fedforest/rng.hpp"
#include "fedforest/sketch.hpp"

namespace fedforest {

namespace {

struct HoldoutSplit {
  std::vector<ClientShard> train;
  Dataset holdout;  // pooled, keeps client ids
};

HoldoutSplit split_holdout(std::span<const ClientShard> shards,
                           double fraction, std::uint64_t seed) {
  HoldoutSplit out;
  std::vector<const ClientShard*> ordered;
  for (const auto& s : shards) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const ClientShard* a, const ClientShard* b) {
              return a->client_id < b->client_id;
            });
  const std::size_t d = ordered.front()->num_features();
  out.holdout.columns.assign(d, {});
  for (const ClientShard* shard : ordered) {
    auto rng = DeterministicRng::derive(
        seed, StreamTag::kHoldoutSplit,
        static_cast<std::uint64_t>(shard->client_id));
    ClientShard train;
    train.client_id = shard->client_id;
    train.columns.assign(d, {});
    for (std::size_t i = 0; i < shard->num_rows(); ++i) {
      const bool held = rng.next_unit() < fraction;
      if (held) {
        for (std::size_t j = 0; j < d; ++j) {
          out.holdout.columns[j].push_back(shard->columns[j][i]);
        }
        out.holdout.y.push_back(shard->y[i]);
        out.holdout.client_id.push_back(shard->client_id);
      } else {
        for (std::size_t j = 0; j < d; ++j) {
          train.columns[j].push_back(shard->columns[j][i]);
        }
        train.y.push_back(shard->y[i]);
      }
    }
    if (train.y.empty()) {
      throw DataError("holdout split left client " +
                      std::to_string(shard->client_id) + " without training rows");
    }
    out.train.push_back(std::move(train));
  }
  if (out.holdout.y.empty()) {
    throw DataError("holdout split produced no measurement rows");
  }
  return out;
}

// Macro one-vs-rest AUC of site membership predicted from covariates.
double site_discriminability(const HoldoutSplit& split,
                             const DiagnosticsOptions& options) {
  const int sites = static_cast<int>(split.train.size());
  if (sites < 2) return 0.5;

  std::vector<ClientShard> labeled = split.train;
  for (int s = 0; s < sites; ++s) {
    auto& shard = labeled[static_cast<std::size_t>(s)];
    std::fill(shard.y.begin(), shard.y.end(), static_cast<double>(s));
  }

  ForestConfig cfg;
  cfg.task = TaskKind::classification(sites);
  cfg.trees = options.trees;
  cfg.max_depth = options.max_depth;
  cfg.min_leaf = options.min_leaf;
  cfg.sketch_levels = options.sketch_levels;
  cfg.mode = Mode::kExactQuantiles;
  cfg.seed = options.seed;
  const Forest forest = fit_forest(labeled, cfg);

  // Site index of each holdout row (clients sorted, as in labeled).
  std::vector<int> site_of;
  site_of.reserve(split.holdout.num_rows());
  for (int id : split.holdout.client_id) {
    int s = 0;
    while (split.train[static_cast<std::size_t>(s)].client_id != id) ++s;
    site_of.push_back(s);
  }

  std::vector<std::vector<double>> shares;
  shares.reserve(split.holdout.num_rows());
  for (std::size_t i = 0; i < split.holdout.num_rows(); ++i) {
    shares.push_back(vote_shares(forest, split.holdout.row(i)));
  }

  double total = 0.0;
  for (int s = 0; s < sites; ++s) {
    std::vector<double> scores, labels;
    scores.reserve(shares.size());
    labels.reserve(shares.size());
    for (std::size_t i = 0; i < shares.size(); ++i) {
      scores.push_back(shares[i][static_cast<std::size_t>(s)]);
      labels.push_back(site_of[i] == s ? 1.0 : 0.0);
    }
    total += auc(scores, labels);
  }
  return total / static_cast<double>(sites);
}

double holdout_metric(const Forest& forest, const Dataset& holdout,
                      const TaskKind& task) {
  const auto predictions = predict_all(forest, holdout);
  return task.is_classification() ? accuracy(predictions, holdout.y)
                                  : r_squared(predictions, holdout.y);
}

// Root site-Gini gains per feature. For each sketch-derived candidate
// every client contributes only its left count; the site label's Gini
// gain is scored from those counts alone.
std::vector<double> root_site_gains(std::span<const ClientShard> shards,
                                    int sketch_levels) {
  const int sites = static_cast<int>(shards.size());
  const TaskKind site_task = TaskKind::classification(sites);
  SuffStats parent = SuffStats::zero(site_task);
  for (int s = 0; s < sites; ++s) {
    const auto rows = static_cast<std::int64_t>(shards[static_cast<std::size_t>(s)].num_rows());
    parent.counts[static_cast<std::size_t>(s)] = rows;
    parent.n += rows;
  }

  const std::size_t d = shards.front().num_features();
  std::vector<double> gains(d, 0.0);
  for (std::size_t f = 0; f < d; ++f) {
    std::vector<QuantileSketch> sketches;
    sketches.reserve(shards.size());
    for (const auto& shard : shards) {
      sketches.push_back(build_sketch(shard.columns[f], sketch_levels));
    }
    const PooledCdf pooled(std::move(sketches));
    for (double t : candidate_thresholds(pooled, sketch_levels)) {
      SuffStats left = SuffStats::zero(site_task);
      for (int s = 0; s < sites; ++s) {
        std::int64_t count = 0;
        for (double v : shards[static_cast<std::size_t>(s)].columns[f]) {
          if (v <= t) ++count;
        }
        left.counts[static_cast<std::size_t>(s)] = count;
        left.n += count;
      }
      const auto gain = split_gain(parent, left, ImpurityKind::kGini);
      if (gain && *gain > gains[f]) gains[f] = *gain;
    }
  }
  return gains;
}

}  // namespace

DiagnosticsReport run_diagnostics(std::span<const ClientShard> shards,
                                  const TaskKind& task,
                                  const DiagnosticsOptions& options) {
  if (options.holdout_fraction <= 0.0 || options.holdout_fraction >= 1.0) {
    throw ConfigError("holdout_fraction must lie strictly between 0 and 1");
  }
  if (shards.size() < 2) {
    throw ConfigError("heterogeneity diagnostics require at least two clients");
  }
  validate_shards(shards, task);
  const HoldoutSplit split =
      split_holdout(shards, options.holdout_fraction, options.seed);

  DiagnosticsReport report;
  report.per_feature_site_gains = root_site_gains(shards, options.sketch_levels);
  for (double g : report.per_feature_site_gains) {
    if (g > report.covariate_shift_gain) report.covariate_shift_gain = g;
  }
  report.site_auc = site_discriminability(split, options);

  ForestConfig cfg;
  cfg.task = task;
  cfg.trees = options.trees;
  cfg.max_depth = options.max_depth;
  cfg.min_leaf = options.min_leaf;
  cfg.sketch_levels = options.sketch_levels;
  cfg.mode = Mode::kExactQuantiles;
  cfg.seed = options.seed;

  cfg.include_h = false;
  report.metric_x = holdout_metric(fit_forest(split.train, cfg), split.holdout, task);
  cfg.include_h = true;
  report.metric_xh = holdout_metric(fit_forest(split.train, cfg), split.holdout, task);
  report.outcome_delta = report.metric_xh - report.metric_x;

  report.covariate_shift = report.site_auc >= options.site_auc_threshold ||
                           report.covariate_shift_gain >= options.root_gain_threshold;
  report.outcome_shift = report.outcome_delta >= options.outcome_delta_threshold;
  report.fast_mode_ok = !report.covariate_shift && !report.outcome_shift;
  return report;
}

}  // namespace fedforest
