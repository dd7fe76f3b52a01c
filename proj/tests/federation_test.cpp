#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "doctest.h"
#include "fedforest/baselines.hpp"
#include "fedforest/federation.hpp"
#include "fedforest/ledger.hpp"
#include "fedforest/rng.hpp"
#include "fedforest/serialize.hpp"
#include "fedforest/sketch.hpp"

using namespace fedforest;

namespace {

// Random regression shards with a signal on feature 0.
std::vector<ClientShard> make_shards(int clients, int rows, int features,
                                     std::uint64_t seed, double shift_scale = 0.0) {
  std::vector<ClientShard> shards;
  for (int k = 0; k < clients; ++k) {
    ClientShard shard;
    shard.client_id = k;
    shard.columns.resize(static_cast<std::size_t>(features));
    auto rng = DeterministicRng::derive(seed, StreamTag::kGeneric, 100 + k);
    const double shift = (k % 2 == 0 ? -1.0 : 1.0) * shift_scale;
    for (int i = 0; i < rows; ++i) {
      for (int f = 0; f < features; ++f) {
        shard.columns[static_cast<std::size_t>(f)].push_back(
            rng.next_gaussian() + (f == 0 ? shift : 0.0));
      }
      const double x0 = shard.columns[0].back();
      shard.y.push_back(2.0 * x0 + 0.5 * rng.next_gaussian());
    }
    shards.push_back(std::move(shard));
  }
  return shards;
}

struct RefNode {
  bool leaf = true;
  SplitCandidate split;
  double prediction = 0.0;
  int left = -1, right = -1;
};

// Single-tree grower over pooled rows using sketch-derived candidates
// and direct arithmetic on raw values. An independent reference for the
// protocol path: no messages, no aggregation, no stats subtraction.
struct RefGrower {
  const std::vector<std::vector<double>>& cols;
  const std::vector<double>& y;
  const ForestConfig& cfg;
  std::vector<RefNode> nodes;

  double mean(const std::vector<std::uint32_t>& rows) const {
    double s = 0.0;
    for (auto r : rows) s += y[r];
    return s / static_cast<double>(rows.size());
  }

  double sse(const std::vector<std::uint32_t>& rows) const {
    const double m = mean(rows);
    double s = 0.0;
    for (auto r : rows) s += (y[r] - m) * (y[r] - m);
    return s;
  }

  int grow(std::vector<std::uint32_t> rows, NodePath path, int depth) {
    const int id = static_cast<int>(nodes.size());
    nodes.push_back({});
    nodes[static_cast<std::size_t>(id)].prediction = mean(rows);
    if (depth >= cfg.max_depth) return id;

    const double n = static_cast<double>(rows.size());
    const double parent_impurity = sse(rows) / n;
    std::optional<SplitCandidate> best;
    double best_gain = cfg.min_gain;
    std::vector<std::uint32_t> best_left, best_right;

    const auto features =
        feature_subset(cfg.seed, 0, path, static_cast<int>(cols.size()),
                       cfg.resolved_mtry(cols.size()));
    for (int f : features) {
      std::vector<double> values;
      for (auto r : rows) values.push_back(cols[static_cast<std::size_t>(f)][r]);
      PooledCdf pooled({build_sketch(values, cfg.sketch_levels)});
      for (double t : candidate_thresholds(pooled, cfg.sketch_levels,
                                           cfg.dedup_candidates)) {
        std::vector<std::uint32_t> left, right;
        for (auto r : rows) {
          (cols[static_cast<std::size_t>(f)][r] <= t ? left : right).push_back(r);
        }
        if (left.size() < static_cast<std::size_t>(cfg.min_leaf) ||
            right.size() < static_cast<std::size_t>(cfg.min_leaf)) {
          continue;
        }
        const double gain = parent_impurity - (sse(left) + sse(right)) / n;
        SplitCandidate cand = SplitCandidate::numeric(f, t);
        if (gain > best_gain ||
            (best && gain == best_gain && candidate_less(cand, *best))) {
          best = cand;
          best_gain = gain;
          best_left = left;
          best_right = right;
        }
      }
    }
    if (!best) return id;
    nodes[static_cast<std::size_t>(id)].leaf = false;
    nodes[static_cast<std::size_t>(id)].split = *best;
    const int l = grow(best_left, path.child(0), depth + 1);
    const int r = grow(best_right, path.child(1), depth + 1);
    nodes[static_cast<std::size_t>(id)].left = l;
    nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }
};

void check_same_tree(const Tree& tree, const std::vector<RefNode>& ref, int got,
                     int want) {
  const TreeNode& a = tree.nodes[static_cast<std::size_t>(got)];
  const RefNode& b = ref[static_cast<std::size_t>(want)];
  REQUIRE(a.leaf == b.leaf);
  if (a.leaf) {
    CHECK(a.prediction == doctest::Approx(b.prediction).epsilon(1e-12));
    return;
  }
  CHECK(a.split.feature == b.split.feature);
  CHECK(a.split.threshold == doctest::Approx(b.split.threshold).epsilon(1e-12));
  check_same_tree(tree, ref, a.left, b.left);
  check_same_tree(tree, ref, a.right, b.right);
}

}  // namespace

TEST_CASE("single-client protocol run equals a direct quantile-candidate tree") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    auto shards = make_shards(1, 80, 4, seed);
    ForestConfig cfg;
    cfg.trees = 1;
    cfg.max_depth = 4;
    cfg.min_leaf = 3;
    cfg.mtry = 4;
    cfg.sketch_levels = 8;
    cfg.bootstrap = false;
    cfg.seed = seed;

    Forest fed = fit_forest(shards, cfg);
    REQUIRE(fed.trees.size() == 1);

    RefGrower ref{shards[0].columns, shards[0].y, cfg, {}};
    std::vector<std::uint32_t> all;
    for (std::uint32_t i = 0; i < shards[0].num_rows(); ++i) all.push_back(i);
    ref.grow(all, NodePath{}, 0);

    check_same_tree(fed.trees[0], ref.nodes, 0, 0);
  }
}

TEST_CASE("replicated shards train the same tree as one client") {
  // three clients holding identical rows pool to the same mixture as a
  // single client, and gains are invariant to scaling every count by 3
  auto one = make_shards(1, 90, 3, 17);
  std::vector<ClientShard> three(3);
  for (int k = 0; k < 3; ++k) {
    three[static_cast<std::size_t>(k)] = one[0];
    three[static_cast<std::size_t>(k)].client_id = k;
  }

  ForestConfig cfg;
  cfg.trees = 1;
  cfg.max_depth = 3;
  cfg.min_leaf = 1;
  cfg.mtry = 3;
  cfg.sketch_levels = 16;
  cfg.bootstrap = false;
  cfg.seed = 5;

  Forest a = fit_forest(one, cfg);
  Forest b = fit_forest(three, cfg);
  REQUIRE(a.trees[0].nodes.size() == b.trees[0].nodes.size());
  for (std::size_t n = 0; n < a.trees[0].nodes.size(); ++n) {
    const TreeNode& x = a.trees[0].nodes[n];
    const TreeNode& y = b.trees[0].nodes[n];
    CHECK(x.leaf == y.leaf);
    CHECK(x.split.feature == y.split.feature);
    CHECK(x.split.threshold == doctest::Approx(y.split.threshold).epsilon(1e-12));
    if (x.leaf) CHECK(x.prediction == doctest::Approx(y.prediction).epsilon(1e-12));
  }
}

TEST_CASE("midpoint verification mode reproduces the centralized oracle") {
  for (std::uint64_t seed : {4ull, 5ull, 6ull}) {
    auto shards = make_shards(3, 40, 4, seed);
    ForestConfig cfg;
    cfg.trees = 2;
    cfg.max_depth = 4;
    cfg.min_leaf = 2;
    cfg.mode = Mode::kVerifyMidpoints;
    cfg.seed = seed;

    Forest fed = fit_forest(shards, cfg);
    ForestConfig central = cfg;
    central.mode = Mode::kExactQuantiles;  // ignored by the oracle
    Forest oracle = fit_centralized(shards, central);

    CHECK(model_to_json(fed) != "");
    REQUIRE(fed.trees.size() == oracle.trees.size());
    for (std::size_t t = 0; t < fed.trees.size(); ++t) {
      REQUIRE(fed.trees[t].nodes.size() == oracle.trees[t].nodes.size());
      for (std::size_t n = 0; n < fed.trees[t].nodes.size(); ++n) {
        const TreeNode& a = fed.trees[t].nodes[n];
        const TreeNode& b = oracle.trees[t].nodes[n];
        CHECK(a.leaf == b.leaf);
        CHECK(a.split.feature == b.split.feature);
        CHECK(a.split.threshold == b.split.threshold);
        // client-ordered versus row-ordered accumulation differs in ulps
        CHECK(std::fabs(a.prediction - b.prediction) < 1e-12);
      }
    }
  }
}

TEST_CASE("training is deterministic") {
  auto shards = make_shards(2, 60, 3, 9);
  ForestConfig cfg;
  cfg.trees = 3;
  cfg.max_depth = 4;
  cfg.min_leaf = 2;
  cfg.seed = 21;
  Forest a = fit_forest(shards, cfg);
  Forest b = fit_forest(shards, cfg);
  CHECK(model_to_json(a) == model_to_json(b));
}

// The closing summary round only runs when some leaf still owes its
// statistics; exact and histogram runs resolve every leaf from eval or
// bin replies, averaged runs never do.
std::int64_t summary_rounds(const Trainer& trainer) {
  return trainer.ledger().per_phase().count(Phase::kSummary) ? 1 : 0;
}

TEST_CASE("round count per mode") {
  auto shards = make_shards(2, 60, 3, 10);
  for (int trees : {1, 3}) {
    ForestConfig cfg;
    cfg.trees = trees;
    cfg.max_depth = 3;
    cfg.min_leaf = 2;
    cfg.seed = 2;

    Trainer exact(shards, cfg);
    exact.fit();
    CHECK(exact.ledger().rounds() ==
          2 * static_cast<std::int64_t>(exact.levels_run()) + summary_rounds(exact));
    CHECK(exact.ledger().rounds() <= 2 * cfg.max_depth + 1);

    cfg.mode = Mode::kAvgImpTopL;
    cfg.shortlist_size = 2;
    Trainer avg(shards, cfg);
    avg.fit();
    CHECK(summary_rounds(avg) == 1);
    CHECK(avg.ledger().rounds() ==
          3 * static_cast<std::int64_t>(avg.levels_run()) + 1);

    cfg.mode = Mode::kFedHistogram;
    Trainer hist(shards, cfg);
    hist.fit();
    CHECK(hist.ledger().rounds() ==
          static_cast<std::int64_t>(hist.levels_run()) + summary_rounds(hist));
  }
}

TEST_CASE("closed-form upload cost") {
  NodeUploadModel model;
  model.mode = Mode::kExactQuantiles;
  model.sketched_features = 20;
  model.sketch_levels = 32;
  model.stat_size = 3;
  model.num_candidates = 620;
  CHECK(expected_upload_per_client(model) == 20 * 33 + 3 + 620 * 3);
  CHECK(expected_upload_per_client(model) == 2523);

  // doubling B doubles the sketch term only
  NodeUploadModel doubled = model;
  doubled.sketch_levels = 64;
  CHECK(expected_upload_per_client(doubled) - expected_upload_per_client(model) ==
        20 * 32);

  CHECK(stat_size(TaskKind::regression()) == 3);
  CHECK(stat_size(TaskKind::classification(4)) == 4);
}

TEST_CASE("live ledger matches the closed form on a seeded run") {
  auto shards = make_shards(3, 50, 5, 12);
  ForestConfig cfg;
  cfg.trees = 2;
  cfg.max_depth = 3;
  cfg.min_leaf = 2;
  cfg.mtry = 2;
  cfg.sketch_levels = 8;
  cfg.dedup_candidates = false;
  cfg.seed = 3;

  Trainer trainer(shards, cfg);
  trainer.fit();

  // group rows by node
  std::map<std::pair<int, std::uint64_t>, std::map<Phase, LedgerEntry>> by_node;
  for (const auto& entry : trainer.ledger().entries()) {
    if (entry.tree < 0) continue;
    by_node[{entry.tree, entry.path.key()}][entry.phase] = entry;
  }

  int checked = 0;
  for (const auto& [key, phases] : by_node) {
    auto sketch = phases.find(Phase::kSketch);
    if (sketch == phases.end()) continue;  // leaf-only traffic
    auto eval = phases.find(Phase::kEvaluate);
    auto cand = phases.find(Phase::kCandidates);
    if (eval == phases.end() || cand == phases.end()) continue;

    // Candidate broadcast carries 4 + 2C scalars per cohort member; C is
    // mtry (B - 1) minus the thresholds dropped as degenerate, so read it
    // back from the broadcast itself and cross-check the uploads.
    REQUIRE(cand->second.scalars_down % 3 == 0);
    const std::int64_t per_member = cand->second.scalars_down / 3;
    REQUIRE(per_member >= 4);
    REQUIRE((per_member - 4) % 2 == 0);
    const std::int64_t c = (per_member - 4) / 2;
    CHECK(c <= cfg.mtry * (cfg.sketch_levels - 1));
    if (key.second == NodePath{}.key()) {
      // root nodes are large enough that no threshold degenerates
      CHECK(c == cfg.mtry * (cfg.sketch_levels - 1));
    }

    NodeUploadModel model;
    model.mode = Mode::kExactQuantiles;
    model.sketched_features = cfg.mtry;
    model.sketch_levels = cfg.sketch_levels;
    model.stat_size = 3;
    model.num_candidates = static_cast<int>(c);

    REQUIRE(sketch->second.clients > 0);
    REQUIRE(eval->second.clients > 0);
    CHECK(sketch->second.scalars_up / sketch->second.clients ==
          cfg.mtry * (cfg.sketch_levels + 1) + 3);
    CHECK(eval->second.scalars_up / eval->second.clients == c * 3);
    const std::int64_t live_up =
        sketch->second.scalars_up / sketch->second.clients +
        eval->second.scalars_up / eval->second.clients;
    CHECK(live_up == expected_upload_per_client(model));
    ++checked;
  }
  CHECK(checked >= 6);

  // run totals reconcile with the per-phase view
  std::int64_t up = 0, down = 0;
  for (const auto& [phase, pair] : trainer.ledger().per_phase()) {
    up += pair.first;
    down += pair.second;
  }
  CHECK(up == trainer.ledger().total_up());
  CHECK(down == trainer.ledger().total_down());
}

TEST_CASE("averaged gains miss a split between disjoint supports") {
  // two clients, constant outcomes 0 and 10, supports separated on x0
  std::vector<ClientShard> shards(2);
  for (int k = 0; k < 2; ++k) {
    auto& shard = shards[static_cast<std::size_t>(k)];
    shard.client_id = k;
    shard.columns.resize(2);
    auto rng = DeterministicRng::derive(31, StreamTag::kGeneric, 10 + k);
    for (int i = 0; i < 40; ++i) {
      shard.columns[0].push_back(rng.next_gaussian() * 0.2 + (k == 0 ? -3.0 : 3.0));
      shard.columns[1].push_back(rng.next_gaussian());
      shard.y.push_back(k == 0 ? 0.0 : 10.0);
    }
  }
  ForestConfig cfg;
  cfg.trees = 1;
  cfg.max_depth = 3;
  cfg.min_leaf = 2;
  cfg.mtry = 2;
  cfg.bootstrap = false;
  cfg.seed = 1;

  Forest exact = fit_forest(shards, cfg);
  REQUIRE_FALSE(exact.trees[0].nodes[0].leaf);
  CHECK(exact.trees[0].nodes[0].split.feature == 0);
  // the chosen threshold separates the supports
  CHECK(exact.trees[0].nodes[0].split.threshold > -2.0);
  CHECK(exact.trees[0].nodes[0].split.threshold < 2.0);

  ForestConfig avg_cfg = cfg;
  avg_cfg.mode = Mode::kAvgImpTopL;
  avg_cfg.shortlist_size = 2;
  avg_cfg.min_gain = 1e-9;  // guards against rounding noise in zero gains
  Forest averaged = fit_forest(shards, avg_cfg);
  // every local outcome is constant, so no candidate averages above zero
  CHECK(averaged.trees[0].nodes[0].leaf);
  std::vector<double> probe{0.0, 0.0};
  CHECK(predict(averaged, probe) == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(predict(exact, std::vector<double>{-3.0, 0.0}) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK(predict(exact, std::vector<double>{3.0, 0.0}) ==
        doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("shortlists surface the strongest pooled feature") {
  int hits = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<ClientShard> shards;
    for (int k = 0; k < 5; ++k) {
      ClientShard shard;
      shard.client_id = k;
      shard.columns.resize(6);
      auto rng = DeterministicRng::derive(static_cast<std::uint64_t>(trial),
                                          StreamTag::kGeneric, 40 + k);
      for (int i = 0; i < 200; ++i) {
        for (int f = 0; f < 6; ++f) {
          shard.columns[static_cast<std::size_t>(f)].push_back(rng.next_gaussian());
        }
        shard.y.push_back(3.0 * shard.columns[2].back() + rng.next_gaussian());
      }
      shards.push_back(std::move(shard));
    }

    ForestConfig cfg;
    cfg.trees = 1;
    cfg.mode = Mode::kAvgImpTopL;
    cfg.shortlist_size = 2;
    cfg.mtry = 6;
    cfg.max_depth = 1;
    cfg.min_leaf = 1;
    cfg.bootstrap = false;
    cfg.seed = static_cast<std::uint64_t>(trial);

    Forest forest = fit_forest(shards, cfg);
    if (!forest.trees[0].nodes[0].leaf &&
        forest.trees[0].nodes[0].split.feature == 2) {
      ++hits;
    }
  }
  CHECK(hits >= trials * 95 / 100);
}

TEST_CASE("averaged mode children respect the leaf floor after demotion") {
  auto shards = make_shards(3, 40, 4, 33, 1.5);
  ForestConfig cfg;
  cfg.trees = 4;
  cfg.max_depth = 5;
  cfg.min_leaf = 6;
  cfg.mode = Mode::kAvgImpTopL;
  cfg.shortlist_size = 2;
  cfg.seed = 8;

  Forest forest = fit_forest(shards, cfg);
  for (const auto& tree : forest.trees) {
    for (const auto& node : tree.nodes) {
      if (node.leaf) continue;
      CHECK(node.n_left >= cfg.min_leaf);
      CHECK(node.n_right >= cfg.min_leaf);
    }
  }
}

TEST_CASE("client-set splits capture a pure outcome shift") {
  std::vector<ClientShard> shards(2);
  for (int k = 0; k < 2; ++k) {
    auto& shard = shards[static_cast<std::size_t>(k)];
    shard.client_id = k;
    shard.columns.resize(3);
    auto rng = DeterministicRng::derive(77, StreamTag::kGeneric, 50 + k);
    for (int i = 0; i < 50; ++i) {
      for (int f = 0; f < 3; ++f) {
        shard.columns[static_cast<std::size_t>(f)].push_back(rng.next_gaussian());
      }
      shard.y.push_back((k == 0 ? -2.0 : 2.0) + 0.1 * rng.next_gaussian());
    }
  }
  ForestConfig cfg;
  cfg.trees = 1;
  cfg.max_depth = 2;
  cfg.min_leaf = 5;
  cfg.mtry = 3;
  cfg.include_h = true;
  cfg.bootstrap = false;
  cfg.seed = 4;

  Forest forest = fit_forest(shards, cfg);
  REQUIRE_FALSE(forest.trees[0].nodes[0].leaf);
  CHECK(forest.trees[0].nodes[0].split.kind == SplitKind::kClientSet);
  CHECK(forest.uses_client_splits());

  std::vector<double> row{0.0, 0.0, 0.0};
  CHECK(predict(forest, row, 0) < -1.5);
  CHECK(predict(forest, row, 1) > 1.5);
  CHECK_THROWS_AS(predict(forest, row, std::nullopt, true), DataError);
}
