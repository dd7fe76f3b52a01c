#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedforest/config.hpp"
#include "fedforest/synthdata.hpp"

namespace fedforest {

// Training approaches compared by the benchmark sweep. Federated methods
// carry communication totals; purely local or centralized ones report 0.
//   centralized      pooled-data forest (privacy-free reference)
//   centralized-h    pooled forest with the encoded client feature
//   fed-quantiles    federated, pooled-sketch candidates
//   fed-quantiles-h  ... plus client-set splits
//   fed-avgimp       federated, averaged local gains with shortlists
//   fed-avgimp-h     same (client-set splits add nothing under averaging)
//   fed-histogram    federated, fixed equal-width grid
//   local-learning   per-client forests, rows predicted by their own site
//   local-ensemble   per-client forests pooled into one vote
const std::vector<std::string>& benchmark_methods();

struct BenchRequest {
  SynthSpec spec;            // seed field is overridden per repeat
  ForestConfig base;         // shared training settings; mtry 0 = ceil(sqrt(d))
  std::vector<std::string> methods;  // empty = all
  int repeats = 20;
  std::uint64_t first_seed = 1;
  double test_fraction = 0.3;
};

struct BenchCell {
  std::string method;
  std::uint64_t seed = 0;
  double mse = 0.0;
  double r2 = 0.0;
  std::int64_t scalars_up = 0;
  std::int64_t scalars_down = 0;
  std::int64_t rounds = 0;
  std::string status = "ok";  // error text when the cell failed
};

// Fixed cell order (methods outer, seeds inner); failures are isolated
// into the cell's status. Nothing time-dependent enters the result, so
// repeated runs produce identical cells.
std::vector<BenchCell> run_benchmark(const BenchRequest& request,
                                     const GroundTruth& truth);

// method,seed,mse,r2,scalars_up,scalars_down,rounds,status
std::string benchmark_csv(std::span<const BenchCell> cells);

struct MethodStats {
  std::string method;
  int cells = 0;      // successful cells
  double mean_mse = 0.0;
  double se_mse = 0.0;  // standard error over seeds
  double mean_r2 = 0.0;
};

std::vector<MethodStats> summarize(std::span<const BenchCell> cells);

}  // namespace fedforest
