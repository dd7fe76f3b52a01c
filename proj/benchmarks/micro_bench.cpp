// Microbenchmarks for the split-search hot paths and end-to-end training.
// Run with --benchmark_filter=... to narrow; all fixtures are seeded.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "fedforest/baselines.hpp"
#include "fedforest/config.hpp"
#include "fedforest/dataset.hpp"
#include "fedforest/federation.hpp"
#include "fedforest/forest.hpp"
#include "fedforest/sketch.hpp"
#include "fedforest/split.hpp"
#include "fedforest/stats.hpp"

namespace {

using namespace fedforest;

std::vector<double> gaussian_values(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> values(n);
  for (auto& v : values) v = normal(gen);
  return values;
}

std::vector<ClientShard> gaussian_shards(int clients, std::int64_t rows, int features,
                                         std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<ClientShard> shards(static_cast<std::size_t>(clients));
  for (int k = 0; k < clients; ++k) {
    auto& shard = shards[static_cast<std::size_t>(k)];
    shard.client_id = k;
    shard.columns.assign(static_cast<std::size_t>(features), {});
    for (std::int64_t r = 0; r < rows; ++r) {
      double score = 0.0;
      for (int f = 0; f < features; ++f) {
        const double v = normal(gen);
        shard.columns[static_cast<std::size_t>(f)].push_back(v);
        score += (f == 0 ? 2.0 : 0.2) * v;
      }
      shard.y.push_back(score + 0.5 * normal(gen));
    }
  }
  return shards;
}

void bm_build_sketch(benchmark::State& state) {
  const auto values = gaussian_values(static_cast<std::size_t>(state.range(0)), 42);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_sketch(values, 32));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_build_sketch)->Arg(1000)->Arg(10000)->Arg(100000);

void bm_pooled_quantiles(benchmark::State& state) {
  std::vector<QuantileSketch> sketches;
  for (std::uint64_t k = 0; k < 8; ++k)
    sketches.push_back(build_sketch(gaussian_values(2000, 100 + k), 32));
  for (auto _ : state) {
    PooledCdf pooled(sketches);
    benchmark::DoNotOptimize(candidate_thresholds(pooled, 32));
  }
}
BENCHMARK(bm_pooled_quantiles);

void bm_split_gain(benchmark::State& state) {
  const auto y = gaussian_values(4096, 7);
  const auto parent = SuffStats::from_sample(y, TaskKind::regression());
  std::vector<SuffStats> lefts;
  for (std::size_t cut = 128; cut < y.size(); cut += 128)
    lefts.push_back(SuffStats::from_sample({y.data(), cut}, TaskKind::regression()));
  for (auto _ : state) {
    double total = 0.0;
    for (const auto& left : lefts)
      total += split_gain(parent, left, ImpurityKind::kVariance).value_or(0.0);
    benchmark::DoNotOptimize(total);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(lefts.size()));
}
BENCHMARK(bm_split_gain);

void bm_fit_federated(benchmark::State& state) {
  const auto shards = gaussian_shards(4, state.range(0), 8, 11);
  ForestConfig cfg;
  cfg.trees = 5;
  cfg.max_depth = 6;
  cfg.min_leaf = 5;
  cfg.seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_forest(shards, cfg));
  }
}
BENCHMARK(bm_fit_federated)->Arg(100)->Arg(400);

void bm_fit_centralized(benchmark::State& state) {
  const auto shards = gaussian_shards(4, state.range(0), 8, 11);
  ForestConfig cfg;
  cfg.trees = 5;
  cfg.max_depth = 6;
  cfg.min_leaf = 5;
  cfg.seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_centralized(shards, cfg));
  }
}
BENCHMARK(bm_fit_centralized)->Arg(100)->Arg(400);

void bm_predict(benchmark::State& state) {
  const auto shards = gaussian_shards(4, 400, 8, 11);
  ForestConfig cfg;
  cfg.trees = 20;
  cfg.max_depth = 8;
  cfg.min_leaf = 3;
  cfg.seed = 1;
  const Forest forest = fit_forest(shards, cfg);
  const Dataset pooled = pool_shards(shards);
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict_all(forest, pooled));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pooled.num_rows()));
}
BENCHMARK(bm_predict);

}  // namespace

BENCHMARK_MAIN();
