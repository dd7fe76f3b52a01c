#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedforest/common.hpp"

namespace fedforest {

// Equal-probability quantile summary of one client's node-local feature
// values: B+1 non-decreasing breakpoints at levels 0, 1/B, ..., 1, plus
// the sample count. This is the only per-feature payload a client sends.
struct QuantileSketch {
  std::vector<double> breakpoints;  // size B + 1
  std::int64_t n = 0;

  int levels() const { return static_cast<int>(breakpoints.size()) - 1; }
  bool operator==(const QuantileSketch&) const = default;
};

// Builds the sketch of `values` with B levels. Breakpoint b is the sample
// quantile at level b/B, linearly interpolated between order statistics
// at fractional position (b/B)(n-1). Requires n >= 1 and B >= 1.
QuantileSketch build_sketch(std::span<const double> values, int levels);

// Piecewise-linear CDF interpolant of a sketch. Returns 0 below the first
// breakpoint and 1 from the last on. A flat run of tied breakpoints
// carries its full rank mass at its right edge, i.e. the interpolant
// takes a vertical step there.
double sketch_cdf(const QuantileSketch& sketch, double x);

// Left limit of sketch_cdf at x; equals sketch_cdf(x) except at steps.
double sketch_cdf_left(const QuantileSketch& sketch, double x);

// Count-weighted mixture of client sketches approximating the CDF of the
// pooled node sample. Weights are n_k / sum n_k.
class PooledCdf {
 public:
  // Components must share the task's feature; zero-count sketches are
  // dropped. Throws EmptyNodeError if no samples remain.
  explicit PooledCdf(std::vector<QuantileSketch> components);

  double cdf(double x) const;

  // Smallest x with cdf(x) >= p, for p in (0, 1), except that a level
  // landing on a flat segment resolves to the segment's midpoint; jumps
  // resolve to the jump point.
  double quantile(double p) const;

  std::int64_t total_count() const { return total_; }
  // Largest breakpoint across components; no sample lies above it.
  double max_value() const { return knots_.back(); }
  const std::vector<QuantileSketch>& components() const { return components_; }

 private:
  std::vector<QuantileSketch> components_;
  std::vector<double> weights_;
  std::vector<double> knots_;  // sorted union of component breakpoints
  std::int64_t total_ = 0;

  double cdf_left(double x) const;
};

// Interior pooled quantiles at levels b/B, b = 1..B-1, sorted. These are
// the candidate split thresholds for one feature. Duplicates (tied
// quantiles) are removed unless dedup is false, which keeps the exact
// B-1 slots some communication accounting assumes.
std::vector<double> candidate_thresholds(const PooledCdf& pooled, int levels,
                                         bool dedup = true);

}  // namespace fedforest
