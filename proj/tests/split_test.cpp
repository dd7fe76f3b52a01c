#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "doctest.h"
#include "fedforest/rng.hpp"
#include "fedforest/split.hpp"

using namespace fedforest;

namespace {

SuffStats reg_stats(const std::vector<double>& ys) {
  return SuffStats::from_sample(std::span<const double>(ys), TaskKind::regression());
}

SuffStats bin_stats(const std::vector<double>& labels) {
  return SuffStats::from_sample(std::span<const double>(labels),
                                TaskKind::classification(2));
}

// Exhaustive best bipartition gain over groups, the oracle the
// contiguous-prefix scan must match.
double brute_force_best_gain(const std::map<int, SuffStats>& groups, ImpurityKind kind) {
  std::vector<const SuffStats*> parts;
  for (const auto& [id, stats] : groups) parts.push_back(&stats);
  const std::size_t k = parts.size();
  SuffStats parent = *parts[0];
  for (std::size_t i = 1; i < k; ++i) parent = add_stats(parent, *parts[i]);

  double best = -1.0;
  for (std::size_t mask = 1; mask + 1 < (1u << k); ++mask) {
    SuffStats left = SuffStats::zero(TaskKind::regression());
    left.counts = parts[0]->counts.empty() ? std::vector<std::int64_t>{}
                                           : std::vector<std::int64_t>(
                                                 parts[0]->counts.size(), 0);
    bool any = false;
    for (std::size_t i = 0; i < k; ++i) {
      if (mask & (1u << i)) {
        left = any ? add_stats(left, *parts[i]) : *parts[i];
        any = true;
      }
    }
    auto gain = split_gain(parent, left, kind);
    if (gain && *gain > best) best = *gain;
  }
  return best;
}

double best_candidate_gain(const std::map<int, SuffStats>& groups,
                           const std::vector<SplitCandidate>& candidates,
                           ImpurityKind kind) {
  SuffStats parent = SuffStats::zero(groups.begin()->second.counts.empty()
                                         ? TaskKind::regression()
                                         : TaskKind::classification(static_cast<int>(
                                               groups.begin()->second.counts.size())));
  for (const auto& [id, stats] : groups) parent = add_stats(parent, stats);
  double best = -1.0;
  for (const auto& cand : candidates) {
    SuffStats left = SuffStats::zero(groups.begin()->second.counts.empty()
                                         ? TaskKind::regression()
                                         : TaskKind::classification(static_cast<int>(
                                               groups.begin()->second.counts.size())));
    for (int id : cand.left_set) left = add_stats(left, groups.at(id));
    auto gain = split_gain(parent, left, kind);
    if (gain && *gain > best) best = *gain;
  }
  return best;
}

}  // namespace

TEST_CASE("client-set candidates are mean-ordered prefixes") {
  std::map<int, SuffStats> sites;
  sites[1] = reg_stats({5, 5});   // mean 5
  sites[2] = reg_stats({1, 1});   // mean 1
  sites[3] = reg_stats({3, 3});   // mean 3
  auto cands = client_set_candidates(sites, TaskKind::regression());
  REQUIRE(cands.size() == 2);
  CHECK(cands[0].kind == SplitKind::kClientSet);
  CHECK(cands[0].left_set == std::vector<int>{2});
  CHECK(cands[1].left_set == std::vector<int>{2, 3});
  CHECK(fisher_order(sites, TaskKind::regression()) == std::vector<int>{2, 3, 1});
}

TEST_CASE("prefix scan attains the exhaustive bipartition optimum") {
  auto rng = DeterministicRng::derive(21, StreamTag::kGeneric);
  for (int trial = 0; trial < 50; ++trial) {
    std::map<int, SuffStats> sites;
    const int k = 3 + static_cast<int>(rng.next_below(2));
    for (int id = 0; id < k; ++id) {
      std::vector<double> ys;
      const int n = 2 + static_cast<int>(rng.next_below(8));
      for (int i = 0; i < n; ++i) {
        ys.push_back(rng.next_gaussian() + static_cast<double>(rng.next_below(3)));
      }
      sites[id] = reg_stats(ys);
    }
    auto cands = client_set_candidates(sites, TaskKind::regression());
    REQUIRE(cands.size() == static_cast<std::size_t>(k - 1));
    const double scan = best_candidate_gain(sites, cands, ImpurityKind::kVariance);
    const double brute = brute_force_best_gain(sites, ImpurityKind::kVariance);
    CHECK(scan == doctest::Approx(brute).epsilon(1e-12));
  }
}

TEST_CASE("prefix scan is optimal for binary classification too") {
  auto rng = DeterministicRng::derive(22, StreamTag::kGeneric);
  for (int trial = 0; trial < 30; ++trial) {
    std::map<int, SuffStats> sites;
    for (int id = 0; id < 4; ++id) {
      std::vector<double> labels;
      const int n = 2 + static_cast<int>(rng.next_below(8));
      for (int i = 0; i < n; ++i) {
        labels.push_back(static_cast<double>(rng.next_below(2)));
      }
      sites[id] = bin_stats(labels);
    }
    auto cands = client_set_candidates(sites, TaskKind::classification(2));
    const double scan = best_candidate_gain(sites, cands, ImpurityKind::kGini);
    const double brute = brute_force_best_gain(sites, ImpurityKind::kGini);
    CHECK(scan == doctest::Approx(brute).epsilon(1e-12));
  }
}

TEST_CASE("categorical candidates order categories by mean") {
  std::map<int, SuffStats> cats;
  cats[0] = reg_stats({0.9, 0.9});  // mean 0.9
  cats[1] = reg_stats({0.1, 0.1});  // mean 0.1
  cats[2] = reg_stats({0.5, 0.5});  // mean 0.5
  auto cands = categorical_candidates(4, cats, TaskKind::regression());
  REQUIRE(cands.size() == 2);
  CHECK(cands[0].kind == SplitKind::kCategorical);
  CHECK(cands[0].feature == 4);
  CHECK(cands[0].left_set == std::vector<int>{1});
  CHECK(cands[1].left_set == std::vector<int>{1, 2});
}

TEST_CASE("categorical prefixes attain the exhaustive optimum") {
  auto rng = DeterministicRng::derive(23, StreamTag::kGeneric);
  for (int trial = 0; trial < 30; ++trial) {
    std::map<int, SuffStats> cats;
    for (int c = 0; c < 5; ++c) {
      std::vector<double> ys;
      const int n = 2 + static_cast<int>(rng.next_below(6));
      for (int i = 0; i < n; ++i) ys.push_back(rng.next_gaussian());
      cats[c] = reg_stats(ys);
    }
    auto cands = categorical_candidates(0, cats, TaskKind::regression());
    const double scan = best_candidate_gain(cats, cands, ImpurityKind::kVariance);
    const double brute = brute_force_best_gain(cats, ImpurityKind::kVariance);
    CHECK(scan == doctest::Approx(brute).epsilon(1e-12));
  }
}

TEST_CASE("exact midpoints collapse duplicates") {
  std::vector<double> a{1, 2, 4};
  CHECK(exact_midpoints(a) == std::vector<double>{1.5, 3.0});
  std::vector<double> b{0.0, 0.0, 1.0};
  CHECK(exact_midpoints(b) == std::vector<double>{0.5});
  std::vector<double> c{2.0, 2.0};
  CHECK(exact_midpoints(c).empty());
}

TEST_CASE("exact evaluation matches the pooled gain") {
  SuffStats parent = reg_stats({0, 0, 2, 2});
  std::map<int, SuffStats> lefts;
  lefts[0] = reg_stats({0, 0});
  auto scored = evaluate_exact(parent, lefts, ImpurityKind::kVariance);
  REQUIRE(scored.has_value());
  CHECK(scored->gain == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(scored->left.n == 2);
  CHECK(scored->right.n == 2);
  CHECK(scored->exact);
}

TEST_CASE("exact evaluation equals a centralized gain on random data") {
  auto rng = DeterministicRng::derive(24, StreamTag::kGeneric);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> xs, ys;
    const int n = 10 + static_cast<int>(rng.next_below(60));
    for (int i = 0; i < n; ++i) {
      xs.push_back(rng.next_gaussian());
      ys.push_back(rng.next_gaussian() + (xs.back() > 0 ? 2.0 : 0.0));
    }
    const double threshold = xs[rng.next_below(static_cast<std::uint64_t>(n))];

    // shard rows across 3 clients; only the aggregate may matter
    std::map<int, std::vector<double>> left_ys;
    std::vector<double> left_pool;
    for (int i = 0; i < n; ++i) {
      if (xs[static_cast<std::size_t>(i)] <= threshold) {
        left_ys[i % 3].push_back(ys[static_cast<std::size_t>(i)]);
        left_pool.push_back(ys[static_cast<std::size_t>(i)]);
      }
    }
    if (left_pool.empty() || left_pool.size() == static_cast<std::size_t>(n)) continue;

    std::map<int, SuffStats> lefts;
    for (const auto& [id, group] : left_ys) lefts[id] = reg_stats(group);
    auto scored = evaluate_exact(reg_stats(ys), lefts, ImpurityKind::kVariance);
    REQUIRE(scored.has_value());

    auto pooled_gain =
        split_gain(reg_stats(ys), reg_stats(left_pool), ImpurityKind::kVariance);
    REQUIRE(pooled_gain.has_value());
    CHECK(scored->gain == doctest::Approx(*pooled_gain).epsilon(1e-12));
  }
}

TEST_CASE("a left aggregate exceeding the parent is a protocol error") {
  SuffStats parent = reg_stats({0, 1});
  std::map<int, SuffStats> lefts;
  lefts[0] = reg_stats({0, 1, 2});
  CHECK_THROWS_AS(evaluate_exact(parent, lefts, ImpurityKind::kVariance),
                  ProtocolError);
}

TEST_CASE("averaged local gains weight by client counts") {
  std::map<int, double> gains{{0, 1.0}, {1, 0.0}};
  std::map<int, std::int64_t> counts{{0, 3}, {1, 1}};
  auto avg = average_local_gain(gains, counts);
  REQUIRE(avg.has_value());
  CHECK(*avg == doctest::Approx(0.75).epsilon(1e-14));
  CHECK_FALSE(average_local_gain({}, {}).has_value());
}

TEST_CASE("merged shortlists are a sorted union") {
  std::vector<std::vector<int>> lists{{3, 1}, {4, 1}, {2}};
  CHECK(merge_shortlists(lists) == std::vector<int>{1, 2, 3, 4});
}

TEST_CASE("equal gains break ties toward the smaller candidate") {
  SuffStats parent = reg_stats({0, 0, 2, 2});
  SuffStats half = reg_stats({0, 0});

  ScoredSplit on_three;
  on_three.candidate = SplitCandidate::numeric(3, 1.0);
  on_three.gain = 0.5;
  on_three.left = half;
  on_three.right = half;
  on_three.left_count_estimate = 2;
  on_three.right_count_estimate = 2;

  ScoredSplit on_one = on_three;
  on_one.candidate = SplitCandidate::numeric(1, 1.0);

  std::vector<ScoredSplit> scored{on_three, on_one};
  auto best = select_best(scored, 1);
  REQUIRE(best.has_value());
  CHECK(best->candidate.feature == 1);

  // same feature: the lower threshold wins
  on_three.candidate = SplitCandidate::numeric(1, 2.0);
  std::vector<ScoredSplit> again{on_three, on_one};
  best = select_best(again, 1);
  REQUIRE(best.has_value());
  CHECK(best->candidate.threshold == 1.0);

  // numeric sorts before client-set at equal gain
  ScoredSplit h = on_one;
  h.candidate = SplitCandidate::client_set({0});
  std::vector<ScoredSplit> mixed{h, on_three};
  best = select_best(mixed, 1);
  REQUIRE(best.has_value());
  CHECK(best->candidate.kind == SplitKind::kNumeric);
}

TEST_CASE("min leaf and min gain filter candidates") {
  SuffStats parent = reg_stats({0, 0, 2, 2});
  ScoredSplit s;
  s.candidate = SplitCandidate::numeric(0, 0.5);
  s.gain = 1.0;
  s.left = reg_stats({0});
  s.right = reg_stats({0, 2, 2});
  s.left_count_estimate = 1;
  s.right_count_estimate = 3;
  std::vector<ScoredSplit> scored{s};
  CHECK_FALSE(select_best(scored, 2).has_value());
  CHECK(select_best(scored, 1).has_value());
  CHECK_FALSE(select_best(scored, 1, 1.5).has_value());
}
