#include "fedforest/synthdata.hpp"

#include <cmath>
#include <numbers>

#include "fedforest/baselines.hpp"
#include "fedforest/rng.hpp"

namespace fedforest {

std::string scenario_name(Scenario scenario) {
  switch (scenario) {
    case Scenario::kHomogeneous: return "homogeneous";
    case Scenario::kCovariateShift: return "covariate-shift";
    case Scenario::kOutcomeShift: return "outcome-shift";
    case Scenario::kFullHetero: return "full-hetero";
    case Scenario::kDisjointStep: return "disjoint-step";
    case Scenario::kOverlapLinear: return "overlap-linear";
  }
  throw ConfigError("unknown scenario");
}

Scenario scenario_from_name(const std::string& name) {
  if (name == "homogeneous") return Scenario::kHomogeneous;
  if (name == "covariate-shift") return Scenario::kCovariateShift;
  if (name == "outcome-shift") return Scenario::kOutcomeShift;
  if (name == "full-hetero") return Scenario::kFullHetero;
  if (name == "disjoint-step") return Scenario::kDisjointStep;
  if (name == "overlap-linear") return Scenario::kOverlapLinear;
  throw ConfigError("unknown scenario '" + name + "'");
}

void SynthSpec::validate() const {
  if (clients < 1) throw ConfigError("need at least one client");
  if (rows_per_client < 1) throw ConfigError("rows_per_client must be positive");
  if (features < 2) throw ConfigError("need at least two features");
  if (alpha <= 0.0) throw ConfigError("alpha must be positive");
  if (noise < 0.0) throw ConfigError("noise must be nonnegative");
  if (gamma < 0.0 || delta < 0.0) {
    throw ConfigError("shift magnitudes must be nonnegative");
  }
}

double SynthSpec::feature_mean(int client, int feature) const {
  const double sign = client % 2 == 0 ? -1.0 : 1.0;
  switch (scenario) {
    case Scenario::kDisjointStep:
      return feature == 0 ? sign * gamma : 0.0;
    default:
      // The mixture scenarios and the overlap ablation shift every
      // coordinate by the same signed amount.
      return sign * gamma;
  }
}

double SynthSpec::feature_sd(int feature) const {
  (void)feature;
  const double sd = std::sqrt(alpha);
  return scenario == Scenario::kOverlapLinear ? 1.5 * sd : sd;
}

double SynthSpec::outcome_shift(int client) const {
  return client % 2 == 0 ? -delta : delta;
}

namespace {

// Additive reference surface on [-10, 10]^d. Coordinates are rescaled to
// [0, 1]; term j (1-based) cycles through a step, a sine and a pairwise
// product with the next coordinate (wrapping).
double reference_surface(std::span<const double> x) {
  const int d = static_cast<int>(x.size());
  double y = 0.0;
  for (int j = 1; j <= d; ++j) {
    const double z = (x[static_cast<std::size_t>(j - 1)] + 10.0) / 20.0;
    switch (j % 3) {
      case 0:
        y += z > 0.5 ? 1.0 : 0.0;
        break;
      case 1:
        y += std::sin(4.0 * std::numbers::pi * z);
        break;
      default: {
        const int next = (j % d) + 1;
        const double zn = (x[static_cast<std::size_t>(next - 1)] + 10.0) / 20.0;
        y += z * zn;
        break;
      }
    }
  }
  return y;
}

// Scenario regression surface before shift and noise.
double surface_value(const SynthSpec& spec, const GroundTruth& truth,
                     std::span<const double> row) {
  switch (spec.scenario) {
    case Scenario::kDisjointStep:
      return row[0] > 0.0 ? 10.0 : 0.0;
    case Scenario::kOverlapLinear:
      return row[0];
    default:
      return truth(row);
  }
}

void check_truth(const SynthSpec& spec, const GroundTruth& truth) {
  if (spec.uses_distilled_truth() && truth.features() != spec.features) {
    throw ConfigError("ground truth dimension differs from spec");
  }
}

constexpr std::int64_t kDistillRows = 10000;

}  // namespace

GroundTruth::GroundTruth(int features) : features_(features) {
  if (features < 2) throw ConfigError("need at least two features");
  auto rng = DeterministicRng::derive(0, StreamTag::kGroundTruth);
  ClientShard aux;
  aux.client_id = 0;
  aux.columns.assign(static_cast<std::size_t>(features), {});
  for (auto& col : aux.columns) {
    col.reserve(kDistillRows);
  }
  aux.y.reserve(kDistillRows);
  std::vector<double> row(static_cast<std::size_t>(features));
  for (std::int64_t i = 0; i < kDistillRows; ++i) {
    for (int j = 0; j < features; ++j) {
      row[static_cast<std::size_t>(j)] = -10.0 + 20.0 * rng.next_unit();
      aux.columns[static_cast<std::size_t>(j)].push_back(
          row[static_cast<std::size_t>(j)]);
    }
    aux.y.push_back(reference_surface(row));
  }

  ForestConfig cfg;
  cfg.task = TaskKind::regression();
  cfg.trees = 1;
  cfg.max_depth = 8;
  cfg.min_leaf = 1;
  cfg.mtry = features;
  cfg.bootstrap = false;
  cfg.seed = 0;
  forest_ = fit_centralized(std::span<const ClientShard>(&aux, 1), cfg, false);
}

double GroundTruth::operator()(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != features_) {
    throw DataError("ground truth called with wrong dimension");
  }
  return predict(forest_, x);
}

std::vector<ClientShard> generate_shards(const SynthSpec& spec,
                                         const GroundTruth& truth) {
  spec.validate();
  check_truth(spec, truth);
  std::vector<ClientShard> shards;
  shards.reserve(static_cast<std::size_t>(spec.clients));
  std::vector<double> row(static_cast<std::size_t>(spec.features));
  for (int c = 0; c < spec.clients; ++c) {
    ClientShard shard;
    shard.client_id = c;
    shard.columns.assign(static_cast<std::size_t>(spec.features), {});
    for (int j = 0; j < spec.features; ++j) {
      auto rng = DeterministicRng::derive(spec.seed, StreamTag::kCovariate,
                                          static_cast<std::uint64_t>(c),
                                          static_cast<std::uint64_t>(j));
      const double mean = spec.feature_mean(c, j);
      const double scale = spec.feature_sd(j);
      auto& col = shard.columns[static_cast<std::size_t>(j)];
      col.reserve(static_cast<std::size_t>(spec.rows_per_client));
      for (std::int64_t i = 0; i < spec.rows_per_client; ++i) {
        col.push_back(mean + scale * rng.next_gaussian());
      }
    }
    auto noise_rng = DeterministicRng::derive(spec.seed, StreamTag::kNoise,
                                              static_cast<std::uint64_t>(c));
    const double shift = spec.outcome_shift(c);
    shard.y.reserve(static_cast<std::size_t>(spec.rows_per_client));
    for (std::int64_t i = 0; i < spec.rows_per_client; ++i) {
      for (int j = 0; j < spec.features; ++j) {
        row[static_cast<std::size_t>(j)] =
            shard.columns[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
      }
      shard.y.push_back(surface_value(spec, truth, row) + shift +
                        spec.noise * noise_rng.next_gaussian());
    }
    shards.push_back(std::move(shard));
  }
  return shards;
}

Dataset generate_test(const SynthSpec& spec, const GroundTruth& truth,
                      std::int64_t rows) {
  spec.validate();
  check_truth(spec, truth);
  if (rows < 1) throw ConfigError("test set needs at least one row");
  Dataset data;
  data.columns.assign(static_cast<std::size_t>(spec.features), {});
  auto rng = DeterministicRng::derive(spec.seed, StreamTag::kTestData);
  std::vector<double> row(static_cast<std::size_t>(spec.features));
  for (std::int64_t i = 0; i < rows; ++i) {
    const int c = static_cast<int>(
        rng.next_below(static_cast<std::uint64_t>(spec.clients)));
    for (int j = 0; j < spec.features; ++j) {
      row[static_cast<std::size_t>(j)] =
          spec.feature_mean(c, j) + spec.feature_sd(j) * rng.next_gaussian();
      data.columns[static_cast<std::size_t>(j)].push_back(
          row[static_cast<std::size_t>(j)]);
    }
    data.y.push_back(surface_value(spec, truth, row) + spec.outcome_shift(c) +
                     spec.noise * rng.next_gaussian());
    data.client_id.push_back(c);
  }
  return data;
}

}  // namespace fedforest
