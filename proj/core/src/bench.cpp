#include "fedforest/bench.hpp"

#include <cmath>
#include <sstream>

#include "fedforest/baselines.hpp"
#include "fedforest/federation.hpp"
#include "fedforest/io.hpp"
#include "fedforest/metrics.hpp"

namespace fedforest {

const std::vector<std::string>& benchmark_methods() {
  static const std::vector<std::string> methods{
      "centralized",   "centralized-h",   "fed-quantiles",
      "fed-quantiles-h", "fed-avgimp",    "fed-avgimp-h",
      "fed-histogram", "local-learning",  "local-ensemble",
  };
  return methods;
}

namespace {

BenchCell run_cell(const std::string& method, const SynthSpec& spec,
                   ForestConfig cfg, const GroundTruth& truth,
                   std::int64_t test_rows) {
  BenchCell cell;
  cell.method = method;
  cell.seed = spec.seed;
  cfg.seed = spec.seed;

  const auto shards = generate_shards(spec, truth);
  const auto test = generate_test(spec, truth, test_rows);

  std::vector<double> predictions;
  if (method == "centralized" || method == "centralized-h") {
    const Forest forest = fit_centralized(shards, cfg, method == "centralized-h");
    predictions = predict_all(forest, test);
  } else if (method == "local-learning") {
    predictions = predict_own_client(fit_local(shards, cfg), test);
  } else if (method == "local-ensemble") {
    predictions = predict_all(local_ensemble(fit_local(shards, cfg)), test);
  } else {
    ForestConfig fed = cfg;
    if (method == "fed-quantiles" || method == "fed-quantiles-h") {
      fed.mode = Mode::kExactQuantiles;
    } else if (method == "fed-avgimp" || method == "fed-avgimp-h") {
      fed.mode = Mode::kAvgImpTopL;
    } else if (method == "fed-histogram") {
      fed.mode = Mode::kFedHistogram;
    } else {
      throw ConfigError("unknown benchmark method '" + method + "'");
    }
    fed.include_h = method.ends_with("-h");
    const Forest forest = fit_forest(shards, fed);
    cell.scalars_up = forest.ledger.scalars_up;
    cell.scalars_down = forest.ledger.scalars_down;
    cell.rounds = forest.ledger.rounds;
    predictions = predict_all(forest, test);
  }

  cell.mse = mse(predictions, test.y);
  cell.r2 = r_squared(predictions, test.y);
  return cell;
}

}  // namespace

std::vector<BenchCell> run_benchmark(const BenchRequest& request,
                                     const GroundTruth& truth) {
  if (request.repeats < 1) throw ConfigError("repeats must be positive");
  if (request.test_fraction <= 0.0 || request.test_fraction >= 1.0) {
    throw ConfigError("test_fraction must lie strictly between 0 and 1");
  }
  const auto& methods =
      request.methods.empty() ? benchmark_methods() : request.methods;

  ForestConfig cfg = request.base;
  cfg.task = TaskKind::regression();
  if (cfg.mtry == 0) {
    cfg.mtry = static_cast<int>(
        std::ceil(std::sqrt(static_cast<double>(request.spec.features))));
  }

  const double tf = request.test_fraction;
  const auto total = static_cast<double>(request.spec.clients) *
                     static_cast<double>(request.spec.rows_per_client);
  const auto test_rows =
      std::max<std::int64_t>(1, std::llround(total * tf / (1.0 - tf)));

  std::vector<BenchCell> cells;
  cells.reserve(methods.size() * static_cast<std::size_t>(request.repeats));
  for (const auto& method : methods) {
    for (int r = 0; r < request.repeats; ++r) {
      SynthSpec spec = request.spec;
      spec.seed = request.first_seed + static_cast<std::uint64_t>(r);
      try {
        cells.push_back(run_cell(method, spec, cfg, truth, test_rows));
      } catch (const std::exception& e) {
        BenchCell failed;
        failed.method = method;
        failed.seed = spec.seed;
        failed.status = e.what();
        cells.push_back(std::move(failed));
      }
    }
  }
  return cells;
}

std::string benchmark_csv(std::span<const BenchCell> cells) {
  std::ostringstream out;
  out << "method,seed,mse,r2,scalars_up,scalars_down,rounds,status\n";
  for (const auto& cell : cells) {
    out << cell.method << ',' << cell.seed << ',';
    if (cell.status == "ok") {
      out << format_double(cell.mse) << ',' << format_double(cell.r2);
    } else {
      out << ',';
    }
    out << ',' << cell.scalars_up << ',' << cell.scalars_down << ','
        << cell.rounds << ',' << cell.status << '\n';
  }
  return out.str();
}

std::vector<MethodStats> summarize(std::span<const BenchCell> cells) {
  std::vector<MethodStats> out;
  for (const auto& cell : cells) {
    MethodStats* stats = nullptr;
    for (auto& s : out) {
      if (s.method == cell.method) {
        stats = &s;
        break;
      }
    }
    if (stats == nullptr) {
      out.push_back({cell.method, 0, 0.0, 0.0, 0.0});
      stats = &out.back();
    }
    if (cell.status != "ok") continue;
    ++stats->cells;
    stats->mean_mse += cell.mse;
    stats->mean_r2 += cell.r2;
    stats->se_mse += cell.mse * cell.mse;
  }
  for (auto& s : out) {
    if (s.cells == 0) continue;
    const auto n = static_cast<double>(s.cells);
    s.mean_mse /= n;
    s.mean_r2 /= n;
    if (s.cells > 1) {
      const double var =
          (s.se_mse - n * s.mean_mse * s.mean_mse) / (n - 1.0);
      s.se_mse = std::sqrt(std::max(0.0, var) / n);
    } else {
      s.se_mse = 0.0;
    }
  }
  return out;
}

}  // namespace fedforest
