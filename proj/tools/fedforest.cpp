// Command line front end: dataset generation, training, prediction,
// evaluation, benchmark sweeps and heterogeneity diagnostics.
//
// Option values use the same spellings as config files, and a flag given
// on the command line wins over the same key in --config, which wins
// over the built-in default.

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fedforest/baselines.hpp"
#include "fedforest/bench.hpp"
#include "fedforest/common.hpp"
#include "fedforest/config.hpp"
#include "fedforest/dataset.hpp"
#include "fedforest/diagnostics.hpp"
#include "fedforest/federation.hpp"
#include "fedforest/forest.hpp"
#include "fedforest/io.hpp"
#include "fedforest/ledger.hpp"
#include "fedforest/metrics.hpp"
#include "fedforest/synthdata.hpp"

namespace ff = fedforest;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::int64_t to_int(const std::string& value, const std::string& key) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (value.empty() || end != value.c_str() + value.size() || errno == ERANGE) {
    throw ff::ConfigError("key '" + key + "': bad integer '" + value + "'");
  }
  return v;
}

double to_real(const std::string& value, const std::string& key) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size() || errno == ERANGE) {
    throw ff::ConfigError("key '" + key + "': bad number '" + value + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto token = value.substr(start, comma - start);
    if (!token.empty()) out.push_back(token);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// Everything a run can be told: training settings, the synthetic
// scenario and the benchmark sweep axes. Config files and flags both
// funnel through apply(), so the two spell keys identically.
struct RunSettings {
  ff::ForestConfig forest;
  ff::SynthSpec spec;
  std::vector<std::string> methods;
  int repeats = 20;
  std::uint64_t first_seed = 1;
  double test_fraction = 0.3;

  void apply(const std::string& key, const std::string& value) {
    if (key == "clients") {
      spec.clients = static_cast<int>(to_int(value, key));
    } else if (key == "rows_per_client") {
      spec.rows_per_client = to_int(value, key);
    } else if (key == "features") {
      spec.features = static_cast<int>(to_int(value, key));
    } else if (key == "gamma") {
      spec.gamma = to_real(value, key);
    } else if (key == "delta") {
      spec.delta = to_real(value, key);
    } else if (key == "alpha") {
      spec.alpha = to_real(value, key);
    } else if (key == "noise") {
      spec.noise = to_real(value, key);
    } else if (key == "scenario") {
      spec.scenario = ff::scenario_from_name(value);
    } else if (key == "methods") {
      methods = split_list(value);
      const auto& known = ff::benchmark_methods();
      for (const auto& m : methods) {
        if (std::find(known.begin(), known.end(), m) == known.end()) {
          throw ff::ConfigError("unknown benchmark method '" + m + "'");
        }
      }
    } else if (key == "repeats") {
      repeats = static_cast<int>(to_int(value, key));
    } else if (key == "first_seed") {
      first_seed = static_cast<std::uint64_t>(to_int(value, key));
    } else if (key == "test_fraction") {
      test_fraction = to_real(value, key);
    } else if (key == "seed") {
      const auto s = static_cast<std::uint64_t>(to_int(value, key));
      forest.seed = s;
      spec.seed = s;
    } else {
      ff::apply_config_entry(forest, key, value);
    }
  }

  void apply_file(const std::string& path) {
    for (const auto& entry : ff::parse_config_file(path)) {
      try {
        apply(entry.key, entry.value);
      } catch (const ff::ConfigError& e) {
        throw ff::ConfigError(path + ":" + std::to_string(entry.line) + ": " + e.what());
      }
    }
  }
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Registers --key flags that defer into `pending`, preserving command
// line order so later duplicates win.
void add_key_option(CLI::App* cmd, KeyValues* pending, const std::string& key,
                    const std::string& help) {
  std::string flag = "--" + key;
  std::replace(flag.begin(), flag.end(), '_', '-');
  cmd->add_option_function<std::string>(
      flag, [pending, key](const std::string& v) { pending->emplace_back(key, v); }, help);
}

void add_forest_options(CLI::App* cmd, KeyValues* pending) {
  add_key_option(cmd, pending, "task", "regression or classification:K");
  add_key_option(cmd, pending, "impurity", "variance, gini or entropy");
  add_key_option(cmd, pending, "trees", "number of trees T");
  add_key_option(cmd, pending, "max_depth", "maximum tree depth M");
  add_key_option(cmd, pending, "min_leaf", "minimum samples per leaf");
  add_key_option(cmd, pending, "mtry", "features tried per node (0 = task default)");
  add_key_option(cmd, pending, "sketch_levels", "quantile sketch size B");
  add_key_option(cmd, pending, "shortlist_size", "per-client shortlist length L");
  add_key_option(cmd, pending, "mode",
                 "exact-quantiles, avgimp-topl, fed-histogram or verify-midpoints");
  add_key_option(cmd, pending, "include_h", "offer client-set splits (true/false)");
  add_key_option(cmd, pending, "client_fraction", "fraction of clients drawn per tree");
  add_key_option(cmd, pending, "min_gain", "minimum impurity decrease to split");
  add_key_option(cmd, pending, "bootstrap", "bootstrap rows per tree (true/false)");
  add_key_option(cmd, pending, "dedup_candidates", "drop duplicate thresholds (true/false)");
  add_key_option(cmd, pending, "seed", "run seed");
}

void add_scenario_options(CLI::App* cmd, KeyValues* pending) {
  add_key_option(cmd, pending, "clients", "number of clients K");
  add_key_option(cmd, pending, "rows_per_client", "training rows per client");
  add_key_option(cmd, pending, "features", "feature count d (>= 2)");
  add_key_option(cmd, pending, "gamma", "covariate mean shift");
  add_key_option(cmd, pending, "delta", "outcome level shift");
  add_key_option(cmd, pending, "alpha", "covariate variance");
  add_key_option(cmd, pending, "noise", "outcome noise standard deviation");
  add_key_option(cmd, pending, "scenario",
                 "homogeneous, covariate-shift, outcome-shift, full-hetero, "
                 "disjoint-step or overlap-linear");
}

RunSettings resolve(const std::string& config_path, const KeyValues& overrides) {
  RunSettings settings;
  if (!config_path.empty()) settings.apply_file(config_path);
  for (const auto& [key, value] : overrides) settings.apply(key, value);
  return settings;
}

// ---------------------------------------------------------------------
// shard ingestion

std::vector<std::string> expand_data_paths(const std::vector<std::string>& args) {
  std::vector<std::string> paths;
  for (const auto& arg : args) {
    if (!fs::is_directory(arg)) {
      paths.push_back(arg);
      continue;
    }
    // A directory stands for the client_N.csv files gen-data wrote there.
    std::vector<std::pair<long, std::string>> found;
    for (const auto& entry : fs::directory_iterator(arg)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("client_", 0) != 0 || entry.path().extension() != ".csv") continue;
      const std::string stem = name.substr(7, name.size() - 7 - 4);
      char* end = nullptr;
      const long index = std::strtol(stem.c_str(), &end, 10);
      if (stem.empty() || end != stem.c_str() + stem.size()) continue;
      found.emplace_back(index, entry.path().string());
    }
    if (found.empty()) throw ff::DataError(arg + ": no client_*.csv files");
    std::sort(found.begin(), found.end());
    for (auto& [index, path] : found) paths.push_back(std::move(path));
  }
  return paths;
}

ff::Dataset read_pooled(const std::vector<std::string>& args) {
  const auto paths = expand_data_paths(args);
  ff::Dataset pooled;
  for (const auto& path : paths) {
    ff::Dataset part = ff::read_dataset_csv(path);
    if (pooled.num_rows() == 0) {
      pooled = std::move(part);
      continue;
    }
    if (part.num_features() != pooled.num_features()) {
      throw ff::DataError(path + ": expected " + std::to_string(pooled.num_features()) +
                          " features, found " + std::to_string(part.num_features()));
    }
    for (std::size_t j = 0; j < pooled.num_features(); ++j) {
      pooled.columns[j].insert(pooled.columns[j].end(), part.columns[j].begin(),
                               part.columns[j].end());
    }
    pooled.y.insert(pooled.y.end(), part.y.begin(), part.y.end());
    pooled.client_id.insert(pooled.client_id.end(), part.client_id.begin(),
                            part.client_id.end());
  }
  return pooled;
}

std::vector<ff::ClientShard> shards_from(const ff::Dataset& pooled) {
  for (const int id : pooled.client_id) {
    if (id < 0) throw ff::DataError("negative client_id " + std::to_string(id));
  }
  auto shards = ff::split_by_client(pooled);
  bool contiguous = true;
  for (std::size_t i = 0; i < shards.size(); ++i) {
    if (shards[i].client_id != static_cast<int>(i)) contiguous = false;
  }
  if (!contiguous) {
    // Ingestion maps arbitrary ids onto 0..K-1 in sorted order.
    std::cerr << "note: client ids are not contiguous, remapping to 0.."
              << shards.size() - 1 << "\n";
    for (std::size_t i = 0; i < shards.size(); ++i) {
      shards[i].client_id = static_cast<int>(i);
    }
  }
  return shards;
}

std::string task_spelling(const ff::TaskKind& task) {
  if (!task.is_classification()) return "regression";
  return "classification:" + std::to_string(task.num_categories);
}

json config_echo(const ff::ForestConfig& cfg, std::size_t num_features) {
  json out;
  out["task"] = task_spelling(cfg.task);
  out["impurity"] = ff::impurity_name(cfg.resolved_impurity());
  out["trees"] = cfg.trees;
  out["max_depth"] = cfg.max_depth;
  out["min_leaf"] = cfg.min_leaf;
  out["mtry"] = cfg.resolved_mtry(num_features);
  out["sketch_levels"] = cfg.sketch_levels;
  out["shortlist_size"] = cfg.shortlist_size;
  out["mode"] = ff::mode_name(cfg.mode);
  out["include_h"] = cfg.include_h;
  out["client_fraction"] = cfg.client_fraction;
  out["min_gain"] = cfg.min_gain;
  out["bootstrap"] = cfg.bootstrap;
  out["dedup_candidates"] = cfg.dedup_candidates;
  out["seed"] = cfg.seed;
  return out;
}

void write_or_print(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
  } else {
    ff::write_text_file(path, content);
  }
}

std::int64_t default_test_rows(std::int64_t train_rows, double fraction) {
  if (!(fraction > 0.0) || !(fraction < 1.0)) {
    throw ff::ConfigError("test_fraction must lie in (0, 1)");
  }
  const double rows = static_cast<double>(train_rows) * fraction / (1.0 - fraction);
  return std::max<std::int64_t>(1, std::llround(rows));
}

// ---------------------------------------------------------------------
// subcommands

int cmd_gen_data(const RunSettings& settings, const std::string& out_dir,
                 std::int64_t test_rows) {
  const auto& spec = settings.spec;
  spec.validate();
  fs::create_directories(out_dir);

  const ff::GroundTruth truth(spec.features);
  const auto shards = ff::generate_shards(spec, truth);

  for (const auto& shard : shards) {
    ff::Dataset one;
    one.columns = shard.columns;
    one.y = shard.y;
    one.client_id.assign(shard.num_rows(), shard.client_id);
    const auto path = fs::path(out_dir) / ("client_" + std::to_string(shard.client_id) + ".csv");
    ff::write_dataset_csv(path.string(), one);
  }

  if (test_rows == 0) {
    test_rows = default_test_rows(static_cast<std::int64_t>(spec.clients) * spec.rows_per_client,
                                  settings.test_fraction);
  }
  const auto test = ff::generate_test(spec, truth, test_rows);
  ff::write_dataset_csv((fs::path(out_dir) / "test.csv").string(), test);

  std::cout << "wrote " << shards.size() << " client files and test.csv (" << test_rows
            << " rows) to " << out_dir << "\n";
  if (spec.uses_distilled_truth()) {
    // The regression surface of the ablation scenarios is analytic; only
    // the distilled tree is worth freezing next to the data.
    ff::write_model((fs::path(out_dir) / "truth.json").string(), truth.forest());
    std::cout << "regression surface frozen as truth.json\n";
  }
  return 0;
}

int cmd_train(const RunSettings& settings, const std::vector<std::string>& data,
              const std::string& model_out, const std::string& metrics_out) {
  const auto pooled = read_pooled(data);
  const auto shards = shards_from(pooled);

  const auto started = std::chrono::steady_clock::now();
  ff::Trainer trainer(shards, settings.forest);
  const ff::Forest forest = trainer.fit();
  const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - started)
                           .count();

  ff::write_model(model_out, forest);

  json metrics;
  metrics["data"] = {{"rows", pooled.num_rows()},
                     {"clients", shards.size()},
                     {"features", pooled.num_features()}};
  metrics["config"] = config_echo(settings.forest, pooled.num_features());
  metrics["ledger"] = {{"scalars_up", forest.ledger.scalars_up},
                       {"scalars_down", forest.ledger.scalars_down},
                       {"rounds", forest.ledger.rounds},
                       {"levels", forest.ledger.levels}};
  json phases = json::object();
  for (const auto& [phase, totals] : trainer.ledger().per_phase()) {
    phases[ff::phase_name(phase)] = {{"scalars_up", totals.first},
                                     {"scalars_down", totals.second}};
  }
  metrics["ledger"]["per_phase"] = phases;
  metrics["wall_ms"] = wall_ms;
  if (!metrics_out.empty()) ff::write_text_file(metrics_out, metrics.dump(2) + "\n");

  std::cout << "trained " << forest.trees.size() << " trees on " << pooled.num_rows()
            << " rows from " << shards.size() << " clients\n"
            << "ledger: " << forest.ledger.scalars_up << " scalars up, "
            << forest.ledger.scalars_down << " scalars down, " << forest.ledger.rounds
            << " rounds, " << forest.ledger.levels << " levels\n"
            << "model written to " << model_out << "\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::vector<std::string>& data,
                const std::string& out, bool strict_h) {
  const ff::Forest forest = ff::read_model(model_path);
  const auto pooled = read_pooled(data);
  const auto predictions = ff::predict_all(forest, pooled, strict_h);

  std::string text = "prediction\n";
  for (const double p : predictions) text += ff::format_double(p) + "\n";
  write_or_print(out, text);
  return 0;
}

int cmd_evaluate(const std::string& model_path, const std::vector<std::string>& data,
                 const std::string& out, bool strict_h) {
  const ff::Forest forest = ff::read_model(model_path);
  const auto pooled = read_pooled(data);
  const auto predictions = ff::predict_all(forest, pooled, strict_h);

  json report;
  report["rows"] = pooled.num_rows();
  report["task"] = task_spelling(forest.task);
  if (!forest.task.is_classification()) {
    report["mse"] = ff::mse(predictions, pooled.y);
    report["r2"] = ff::r_squared(predictions, pooled.y);
  } else {
    report["accuracy"] = ff::accuracy(predictions, pooled.y);
    if (forest.task.num_categories == 2) {
      std::vector<double> scores(pooled.num_rows());
      for (std::size_t i = 0; i < pooled.num_rows(); ++i) {
        scores[i] = ff::vote_shares(forest, pooled.row(i), pooled.client_id[i])[1];
      }
      report["auc"] = ff::auc(scores, pooled.y);
    }
  }

  for (const auto& [key, value] : report.items()) {
    if (value.is_number_float()) {
      std::cout << key << " = " << ff::format_double(value.get<double>()) << "\n";
    } else {
      std::cout << key << " = " << value.dump() << "\n";
    }
  }
  if (!out.empty()) ff::write_text_file(out, report.dump(2) + "\n");
  return 0;
}

std::string summary_table(const std::vector<ff::MethodStats>& stats) {
  std::string text = "method             cells     mean_mse       se_mse      mean_r2\n";
  char line[160];
  for (const auto& s : stats) {
    std::snprintf(line, sizeof line, "%-18s %5d %12.4f %12.4f %12.4f\n", s.method.c_str(),
                  s.cells, s.mean_mse, s.se_mse, s.mean_r2);
    text += line;
  }
  return text;
}

int cmd_benchmark(const RunSettings& settings, const std::string& out,
                  const std::string& summary_out) {
  ff::BenchRequest request;
  request.spec = settings.spec;
  request.base = settings.forest;
  request.methods = settings.methods;
  request.repeats = settings.repeats;
  request.first_seed = settings.first_seed;
  request.test_fraction = settings.test_fraction;

  request.spec.validate();
  const ff::GroundTruth truth(request.spec.features);
  const auto cells = ff::run_benchmark(request, truth);

  ff::write_text_file(out, ff::benchmark_csv(cells));
  const std::string table = summary_table(ff::summarize(cells));
  std::cout << table;
  if (!summary_out.empty()) ff::write_text_file(summary_out, table);

  std::size_t failed = 0;
  for (const auto& cell : cells) {
    if (cell.status != "ok") ++failed;
  }
  std::cout << cells.size() << " cells written to " << out;
  if (failed > 0) std::cout << " (" << failed << " failed)";
  std::cout << "\n";
  return 0;
}

struct DiagSettings {
  ff::TaskKind task = ff::TaskKind::regression();
  ff::DiagnosticsOptions options;

  void apply(const std::string& key, const std::string& value) {
    if (key == "task") {
      ff::ForestConfig probe;
      ff::apply_config_entry(probe, key, value);
      task = probe.task;
    } else if (key == "trees") {
      options.trees = static_cast<int>(to_int(value, key));
    } else if (key == "max_depth") {
      options.max_depth = static_cast<int>(to_int(value, key));
    } else if (key == "sketch_levels") {
      options.sketch_levels = static_cast<int>(to_int(value, key));
    } else if (key == "min_leaf") {
      options.min_leaf = to_int(value, key);
    } else if (key == "holdout_fraction") {
      options.holdout_fraction = to_real(value, key);
    } else if (key == "site_auc_threshold") {
      options.site_auc_threshold = to_real(value, key);
    } else if (key == "root_gain_threshold") {
      options.root_gain_threshold = to_real(value, key);
    } else if (key == "outcome_delta_threshold") {
      options.outcome_delta_threshold = to_real(value, key);
    } else if (key == "seed") {
      options.seed = static_cast<std::uint64_t>(to_int(value, key));
    } else {
      throw ff::ConfigError("unknown diagnostics key '" + key + "'");
    }
  }
};

int cmd_diagnose(const std::string& config_path, const KeyValues& overrides,
                 const std::vector<std::string>& data, const std::string& out) {
  DiagSettings settings;
  if (!config_path.empty()) {
    for (const auto& entry : ff::parse_config_file(config_path)) {
      try {
        settings.apply(entry.key, entry.value);
      } catch (const ff::ConfigError& e) {
        throw ff::ConfigError(config_path + ":" + std::to_string(entry.line) + ": " +
                              e.what());
      }
    }
  }
  for (const auto& [key, value] : overrides) settings.apply(key, value);

  const auto shards = shards_from(read_pooled(data));
  const auto report = ff::run_diagnostics(shards, settings.task, settings.options);

  json doc;
  doc["per_feature_site_gains"] = report.per_feature_site_gains;
  doc["covariate_shift_gain"] = report.covariate_shift_gain;
  doc["site_auc"] = report.site_auc;
  doc["covariate_shift"] = report.covariate_shift;
  doc["metric_x"] = report.metric_x;
  doc["metric_xh"] = report.metric_xh;
  doc["outcome_delta"] = report.outcome_delta;
  doc["outcome_shift"] = report.outcome_shift;
  doc["fast_mode_ok"] = report.fast_mode_ok;

  std::cout << "covariate_shift_gain = " << ff::format_double(report.covariate_shift_gain)
            << "\n"
            << "site_auc = " << ff::format_double(report.site_auc) << "\n"
            << "covariate_shift = " << (report.covariate_shift ? "true" : "false") << "\n"
            << "metric_x = " << ff::format_double(report.metric_x) << "\n"
            << "metric_xh = " << ff::format_double(report.metric_xh) << "\n"
            << "outcome_delta = " << ff::format_double(report.outcome_delta) << "\n"
            << "outcome_shift = " << (report.outcome_shift ? "true" : "false") << "\n"
            << "fast_mode_ok = " << (report.fast_mode_ok ? "true" : "false") << "\n";
  if (!out.empty()) ff::write_text_file(out, doc.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated random forests over simulated clients"};
  app.require_subcommand(1);
  int status = 0;

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic federation");
  KeyValues gen_overrides;
  std::string gen_config;
  std::string gen_out;
  std::int64_t gen_test_rows = 0;
  gen->add_option("--config", gen_config, "key = value config file");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--test-rows", gen_test_rows,
                  "test rows to draw (default: test_fraction of the mixture)");
  add_scenario_options(gen, &gen_overrides);
  add_key_option(gen, &gen_overrides, "seed", "data seed");
  add_key_option(gen, &gen_overrides, "test_fraction", "held-out fraction of the mixture");
  gen->callback([&] {
    status = cmd_gen_data(resolve(gen_config, gen_overrides), gen_out, gen_test_rows);
  });

  // train
  auto* train = app.add_subcommand("train", "Train a federated forest on shard files");
  KeyValues train_overrides;
  std::string train_config;
  std::vector<std::string> train_data;
  std::string train_model_out;
  std::string train_metrics_out;
  train->add_option("--config", train_config, "key = value config file");
  train->add_option("--data", train_data, "shard files or a gen-data directory")
      ->required()
      ->expected(-1);
  train->add_option("--model-out", train_model_out, "model document path")->required();
  train->add_option("--metrics-out", train_metrics_out, "metrics document path");
  add_forest_options(train, &train_overrides);
  train->callback([&] {
    status = cmd_train(resolve(train_config, train_overrides), train_data, train_model_out,
                       train_metrics_out);
  });

  // predict
  auto* predict = app.add_subcommand("predict", "Predict rows with a trained model");
  std::string predict_model;
  std::vector<std::string> predict_data;
  std::string predict_out;
  bool predict_strict = false;
  predict->add_option("--model", predict_model, "model document")->required();
  predict->add_option("--data", predict_data, "dataset files")->required()->expected(-1);
  predict->add_option("--out", predict_out, "prediction file (default stdout)");
  predict->add_flag("--strict-h", predict_strict, "fail on unseen client ids");
  predict->callback(
      [&] { status = cmd_predict(predict_model, predict_data, predict_out, predict_strict); });

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score a trained model on a dataset");
  std::string eval_model;
  std::vector<std::string> eval_data;
  std::string eval_out;
  bool eval_strict = false;
  evaluate->add_option("--model", eval_model, "model document")->required();
  evaluate->add_option("--data", eval_data, "dataset files")->required()->expected(-1);
  evaluate->add_option("--out", eval_out, "metrics document path");
  evaluate->add_flag("--strict-h", eval_strict, "fail on unseen client ids");
  evaluate->callback(
      [&] { status = cmd_evaluate(eval_model, eval_data, eval_out, eval_strict); });

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "Sweep training methods over seeds");
  KeyValues bench_overrides;
  std::string bench_config;
  std::string bench_out;
  std::string bench_summary_out;
  bench->add_option("--config", bench_config, "key = value config file");
  bench->add_option("--out", bench_out, "results CSV path")->required();
  bench->add_option("--summary-out", bench_summary_out, "summary table path");
  add_scenario_options(bench, &bench_overrides);
  add_forest_options(bench, &bench_overrides);
  add_key_option(bench, &bench_overrides, "methods", "comma separated method list");
  add_key_option(bench, &bench_overrides, "repeats", "seeds per method");
  add_key_option(bench, &bench_overrides, "first_seed", "first data seed");
  add_key_option(bench, &bench_overrides, "test_fraction", "held-out fraction of the mixture");
  bench->callback([&] {
    status = cmd_benchmark(resolve(bench_config, bench_overrides), bench_out, bench_summary_out);
  });

  // diagnose
  auto* diagnose = app.add_subcommand("diagnose", "Probe shards for client heterogeneity");
  KeyValues diag_overrides;
  std::string diag_config;
  std::vector<std::string> diag_data;
  std::string diag_out;
  diagnose->add_option("--config", diag_config, "key = value config file");
  diagnose->add_option("--data", diag_data, "shard files or a gen-data directory")
      ->required()
      ->expected(-1);
  diagnose->add_option("--out", diag_out, "report document path");
  add_key_option(diagnose, &diag_overrides, "task", "regression or classification:K");
  add_key_option(diagnose, &diag_overrides, "trees", "probe forest size");
  add_key_option(diagnose, &diag_overrides, "max_depth", "probe forest depth");
  add_key_option(diagnose, &diag_overrides, "sketch_levels", "probe sketch size");
  add_key_option(diagnose, &diag_overrides, "min_leaf", "probe minimum leaf size");
  add_key_option(diagnose, &diag_overrides, "holdout_fraction", "held-out fraction per client");
  add_key_option(diagnose, &diag_overrides, "site_auc_threshold", "covariate shift cut-off");
  add_key_option(diagnose, &diag_overrides, "root_gain_threshold", "site-Gini screen cut-off");
  add_key_option(diagnose, &diag_overrides, "outcome_delta_threshold", "outcome shift cut-off");
  add_key_option(diagnose, &diag_overrides, "seed", "probe seed");
  diagnose->callback(
      [&] { status = cmd_diagnose(diag_config, diag_overrides, diag_data, diag_out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ff::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ff::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const ff::ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return status;
}
