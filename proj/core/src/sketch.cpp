#include "fedforest/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fedforest {

QuantileSketch build_sketch(std::span<const double> values, int levels) {
  if (values.empty()) throw EmptyNodeError("sketch of an empty sample");
  if (levels < 1) throw ConfigError("sketch needs at least 1 level");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  QuantileSketch out;
  out.n = static_cast<std::int64_t>(sorted.size());
  out.breakpoints.resize(static_cast<std::size_t>(levels) + 1);
  const double span = static_cast<double>(sorted.size() - 1);
  for (int b = 0; b <= levels; ++b) {
    const double pos = (static_cast<double>(b) / levels) * span;
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    double q = sorted[lo];
    if (frac > 0.0) q += frac * (sorted[lo + 1] - sorted[lo]);
    out.breakpoints[static_cast<std::size_t>(b)] = q;
  }
  return out;
}

double sketch_cdf(const QuantileSketch& sketch, double x) {
  const auto& q = sketch.breakpoints;
  const int B = sketch.levels();
  // First breakpoint strictly above x; everything before it holds rank
  // mass, which puts a flat run's full mass at its right edge.
  const auto it = std::upper_bound(q.begin(), q.end(), x);
  if (it == q.begin()) return 0.0;
  const auto j = static_cast<std::size_t>(it - q.begin()) - 1;
  if (j == static_cast<std::size_t>(B)) return 1.0;
  double f = static_cast<double>(j) / B;
  if (q[j + 1] > q[j]) f += (x - q[j]) / (q[j + 1] - q[j]) / B;
  return f;
}

double sketch_cdf_left(const QuantileSketch& sketch, double x) {
  const auto& q = sketch.breakpoints;
  const int B = sketch.levels();
  // First breakpoint >= x; its index over B is the limit from below when
  // x sits on a breakpoint, else the CDF is continuous at x.
  const auto it = std::lower_bound(q.begin(), q.end(), x);
  if (it == q.end()) return 1.0;
  if (*it == x) {
    return static_cast<double>(it - q.begin()) / B;
  }
  return sketch_cdf(sketch, x);
}

PooledCdf::PooledCdf(std::vector<QuantileSketch> components) {
  for (auto& c : components) {
    if (c.n < 0) throw ProtocolError("sketch with negative count");
    if (c.n == 0) continue;
    if (static_cast<int>(c.breakpoints.size()) < 2) {
      throw ProtocolError("sketch with fewer than 2 breakpoints");
    }
    total_ += c.n;
    components_.push_back(std::move(c));
  }
  if (total_ == 0) throw EmptyNodeError("pooled CDF with no samples");
  weights_.reserve(components_.size());
  for (const auto& c : components_) {
    weights_.push_back(static_cast<double>(c.n) / static_cast<double>(total_));
  }
  for (const auto& c : components_) {
    knots_.insert(knots_.end(), c.breakpoints.begin(), c.breakpoints.end());
  }
  std::sort(knots_.begin(), knots_.end());
  knots_.erase(std::unique(knots_.begin(), knots_.end()), knots_.end());
}

double PooledCdf::cdf(double x) const {
  double f = 0.0;
  for (std::size_t k = 0; k < components_.size(); ++k) {
    f += weights_[k] * sketch_cdf(components_[k], x);
  }
  return f;
}

double PooledCdf::cdf_left(double x) const {
  double f = 0.0;
  for (std::size_t k = 0; k < components_.size(); ++k) {
    f += weights_[k] * sketch_cdf_left(components_[k], x);
  }
  return f;
}

double PooledCdf::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("pooled quantile requires p in (0, 1)");
  // The mixture is linear between knots with possible jumps at knots, so
  // the leftmost crossing is either a knot or inside one linear segment.
  std::size_t lo = 0, hi = knots_.size();
  while (lo < hi) {  // first knot with cdf >= p
    const std::size_t mid = lo + (hi - lo) / 2;
    if (cdf(knots_[mid]) >= p) hi = mid; else lo = mid + 1;
  }
  double x;
  if (lo == knots_.size()) {
    return knots_.back();  // p <= 1 is always reached
  } else if (lo == 0) {
    x = knots_.front();
  } else {
    const double x1 = knots_[lo - 1], x2 = knots_[lo];
    const double f1 = cdf(x1);
    const double f2_left = cdf_left(x2);
    if (p > f2_left || f2_left <= f1) {
      x = x2;  // crossing happens inside the jump at x2
    } else {
      x = x1 + (p - f1) / (f2_left - f1) * (x2 - x1);
    }
  }
  // When the level lands on a flat run (a gap no client has mass in), any
  // point of the run splits the sample identically; the midpoint keeps the
  // threshold centered between the populated regions on either side.
  double flat_hi = x;
  for (std::size_t j = lo; j < knots_.size() && cdf(knots_[j]) <= p; ++j) {
    flat_hi = knots_[j];
  }
  if (flat_hi > x) return 0.5 * (x + flat_hi);
  return x;
}

std::vector<double> candidate_thresholds(const PooledCdf& pooled, int levels,
                                         bool dedup) {
  if (levels < 1) throw ConfigError("candidate generation needs at least 1 level");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(levels) - 1);
  for (int b = 1; b < levels; ++b) {
    const double t = pooled.quantile(static_cast<double>(b) / levels);
    // A threshold at or past the pooled maximum routes every sample left;
    // a constant feature produces no candidates at all.
    if (t >= pooled.max_value()) continue;
    out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  if (dedup) out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace fedforest
