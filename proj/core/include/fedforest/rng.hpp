#pragma once

#include <cstdint>

namespace fedforest {

// Purpose tag for an independent random stream. Every consumer of
// randomness derives its own stream from (seed, tag, ids...), so results
// never depend on scheduling or on the order in which components run.
enum class StreamTag : std::uint64_t {
  kBootstrap = 1,       // (tree, client)
  kClientSubsample = 2, // (tree)
  kFeatureSubset = 3,   // (tree, node path key)
  kCovariate = 4,       // (client, feature)
  kNoise = 5,           // (client)
  kTestData = 6,        // ()
  kGroundTruth = 7,     // ()
  kHoldoutSplit = 8,    // (client)
  kGeneric = 9,
};

// Inverse of the standard normal CDF (Wichura's AS 241, double precision).
// Deterministic across platforms, accurate to ~1e-15 for p in (0, 1).
double normal_icdf(double p);

// Counter-based generator: a fixed 64-bit key plus an incrementing
// counter fed through a SplitMix64-style finalizer. Streams derived from
// distinct (seed, tag, a, b, c) tuples are statistically independent, and
// any draw is reproducible from the tuple alone.
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t key) : key_(key) {}

  static DeterministicRng derive(std::uint64_t seed, StreamTag tag, std::uint64_t a = 0,
                                 std::uint64_t b = 0, std::uint64_t c = 0);

  std::uint64_t next_u64();

  // Uniform in the open interval (0, 1); 53-bit resolution, never 0 or 1.
  double next_unit();

  // Standard normal deviate via the inverse-CDF transform.
  double next_gaussian() { return normal_icdf(next_unit()); }

  // Uniform integer in [0, n), n >= 1. Unbiased (rejection sampling).
  std::uint64_t next_below(std::uint64_t n);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace fedforest
