#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedforest/dataset.hpp"
#include "fedforest/forest.hpp"

namespace fedforest {

// Synthetic federation regimes. The first four share one generation law
// (distilled-tree outcome, every covariate mean shifted by +-gamma) and
// differ only in which knobs their canonical settings move; the last two
// are the disjoint-support and overlapping-support ablations with their
// own outcome rules.
//   kHomogeneous    : gamma = delta = 0, alpha = 1
//   kCovariateShift : gamma = 3, alpha = 0.5
//   kOutcomeShift   : delta = 1.5, gamma = 0
//   kFullHetero     : gamma = 3, alpha = 0.5, delta = 1.5
//   kDisjointStep   : f(x) = 10 * 1{x_1 > 0}, mean shift on x_1 only
//   kOverlapLinear  : f(x) = x_1, per-coordinate deviation 1.5 * sqrt(alpha)
enum class Scenario {
  kHomogeneous,
  kCovariateShift,
  kOutcomeShift,
  kFullHetero,
  kDisjointStep,
  kOverlapLinear,
};

std::string scenario_name(Scenario scenario);
Scenario scenario_from_name(const std::string& name);

// K clients with equal row counts. Covariates are client-specific
// Gaussians; outcomes add a client level shift delta_k and Gaussian
// noise to the scenario's regression surface. Even-indexed clients take
// the negative shifts (-gamma, -delta).
struct SynthSpec {
  int clients = 2;
  std::int64_t rows_per_client = 150;
  int features = 5;
  Scenario scenario = Scenario::kHomogeneous;
  double gamma = 0.0;  // covariate mean shift
  double delta = 0.0;  // additive outcome shift
  double alpha = 1.0;  // covariate variance
  double noise = 1.0;  // outcome noise standard deviation
  std::uint64_t seed = 0;

  void validate() const;
  bool uses_distilled_truth() const {
    return scenario != Scenario::kDisjointStep && scenario != Scenario::kOverlapLinear;
  }
  double feature_mean(int client, int feature) const;
  double feature_sd(int feature) const;
  double outcome_shift(int client) const;  // delta term of a client
};

// Piecewise-constant regression surface shared by every client: a single
// depth-8 tree distilled from a fixed additive reference function over
// [-10, 10]^features. Depends on the feature count alone, so runs with
// different seeds or shift settings share the same truth.
class GroundTruth {
 public:
  explicit GroundTruth(int features);

  double operator()(std::span<const double> x) const;
  int features() const { return features_; }
  // The distilled tree itself, for freezing alongside generated data.
  const Forest& forest() const { return forest_; }

 private:
  int features_;
  Forest forest_;
};

// Client shards drawn under the spec (client ids 0..K-1). The distilled
// truth is consulted only by the scenarios that use it.
std::vector<ClientShard> generate_shards(const SynthSpec& spec, const GroundTruth& truth);

// Evaluation rows from the client mixture: each row picks a client
// uniformly, then draws from that client's laws; the row keeps the
// client id. Uses its own random stream, so test data never collides
// with training draws.
Dataset generate_test(const SynthSpec& spec, const GroundTruth& truth, std::int64_t rows);

}  // namespace fedforest
