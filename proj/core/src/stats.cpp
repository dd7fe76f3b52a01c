#include "fedforest/stats.hpp"

#include <cmath>
#include <string>

namespace fedforest {

SuffStats SuffStats::zero(const TaskKind& task) {
  SuffStats out;
  if (task.is_classification()) out.counts.assign(task.num_categories, 0);
  return out;
}

SuffStats SuffStats::from_sample(std::span<const double> y, const TaskKind& task) {
  SuffStats out = zero(task);
  for (double v : y) out.accumulate(v, task);
  return out;
}

void SuffStats::accumulate(double y, const TaskKind& task) {
  n += 1;
  if (task.is_classification()) {
    const auto c = static_cast<std::int64_t>(y);
    if (c < 0 || c >= static_cast<std::int64_t>(counts.size()) ||
        static_cast<double>(c) != y) {
      throw DataError("classification outcome must be an integer category in [0, " +
                      std::to_string(counts.size()) + "), got " + std::to_string(y));
    }
    counts[static_cast<std::size_t>(c)] += 1;
  } else {
    sum_y += y;
    sum_yy += y * y;
  }
}

namespace {

void check_same_kind(const SuffStats& a, const SuffStats& b, const char* op) {
  if (a.counts.size() != b.counts.size()) {
    throw ProtocolError(std::string(op) + ": mismatched statistic kinds (" +
                        std::to_string(a.counts.size()) + " vs " +
                        std::to_string(b.counts.size()) + " categories)");
  }
}

}  // namespace

SuffStats add_stats(const SuffStats& a, const SuffStats& b) {
  check_same_kind(a, b, "add_stats");
  SuffStats out = a;
  out.n += b.n;
  out.sum_y += b.sum_y;
  out.sum_yy += b.sum_yy;
  for (std::size_t c = 0; c < out.counts.size(); ++c) out.counts[c] += b.counts[c];
  return out;
}

SuffStats sub_stats(const SuffStats& a, const SuffStats& b) {
  check_same_kind(a, b, "sub_stats");
  if (b.n > a.n) {
    throw ProtocolError("sub_stats: child count " + std::to_string(b.n) +
                        " exceeds parent count " + std::to_string(a.n));
  }
  SuffStats out = a;
  out.n -= b.n;
  out.sum_y -= b.sum_y;
  out.sum_yy -= b.sum_yy;
  for (std::size_t c = 0; c < out.counts.size(); ++c) {
    if (b.counts[c] > a.counts[c]) {
      throw ProtocolError("sub_stats: negative category count at index " + std::to_string(c));
    }
    out.counts[c] -= b.counts[c];
  }
  return out;
}

double impurity_raw(const SuffStats& stats, ImpurityKind kind) {
  if (stats.n <= 0) throw EmptyNodeError("impurity of an empty node");
  const double n = static_cast<double>(stats.n);
  switch (kind) {
    case ImpurityKind::kVariance: {
      if (stats.is_classification()) {
        throw ConfigError("variance impurity on classification statistics");
      }
      const double mean = stats.sum_y / n;
      return stats.sum_yy / n - mean * mean;
    }
    case ImpurityKind::kGini: {
      if (!stats.is_classification()) {
        throw ConfigError("Gini impurity on regression statistics");
      }
      double sumsq = 0.0;
      for (std::int64_t c : stats.counts) {
        const double p = static_cast<double>(c) / n;
        sumsq += p * p;
      }
      return 1.0 - sumsq;
    }
    case ImpurityKind::kEntropy: {
      if (!stats.is_classification()) {
        throw ConfigError("entropy impurity on regression statistics");
      }
      double h = 0.0;
      for (std::int64_t c : stats.counts) {
        if (c == 0) continue;  // 0 log 0 = 0
        const double p = static_cast<double>(c) / n;
        h -= p * std::log(p);
      }
      return h;
    }
  }
  throw ConfigError("unknown impurity kind");
}

double impurity(const SuffStats& stats, ImpurityKind kind) {
  const double value = impurity_raw(stats, kind);
  return value < 0.0 ? 0.0 : value;
}

std::optional<double> split_gain(const SuffStats& parent, const SuffStats& left,
                                 ImpurityKind kind) {
  if (left.n == 0 || left.n == parent.n) return std::nullopt;
  const SuffStats right = sub_stats(parent, left);
  const double n = static_cast<double>(parent.n);
  const double wl = static_cast<double>(left.n) / n;
  const double wr = static_cast<double>(right.n) / n;
  return impurity_raw(parent, kind) - wl * impurity_raw(left, kind) -
         wr * impurity_raw(right, kind);
}

double heterogeneity_gap(std::span<const SuffStats> clients, ImpurityKind kind) {
  SuffStats pooled;
  bool any = false;
  double weighted = 0.0;
  for (const SuffStats& s : clients) {
    if (s.n == 0) continue;
    pooled = any ? add_stats(pooled, s) : s;
    any = true;
  }
  if (!any) throw EmptyNodeError("heterogeneity gap of an empty node");
  const double n = static_cast<double>(pooled.n);
  for (const SuffStats& s : clients) {
    if (s.n == 0) continue;
    weighted += (static_cast<double>(s.n) / n) * impurity_raw(s, kind);
  }
  return impurity_raw(pooled, kind) - weighted;
}

double leaf_value(const SuffStats& stats, const TaskKind& task) {
  if (stats.n <= 0) throw EmptyNodeError("leaf value of an empty node");
  if (!task.is_classification()) return stats.sum_y / static_cast<double>(stats.n);
  std::size_t best = 0;
  for (std::size_t c = 1; c < stats.counts.size(); ++c) {
    if (stats.counts[c] > stats.counts[best]) best = c;  // lowest index wins ties
  }
  return static_cast<double>(best);
}

}  // namespace fedforest
