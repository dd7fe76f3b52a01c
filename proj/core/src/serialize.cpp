#include "fedforest/serialize.hpp"

#include <utility>

#include "json.hpp"

namespace fedforest {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "fedforest-model";
constexpr int kVersion = 1;

json task_to_json(const TaskKind& task) {
  if (task.is_classification()) {
    return {{"type", "classification"}, {"categories", task.num_categories}};
  }
  return {{"type", "regression"}};
}

TaskKind task_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "regression") return TaskKind::regression();
  if (type == "classification") {
    return TaskKind::classification(j.at("categories").get<int>());
  }
  throw DataError("unknown task type '" + type + "'");
}

json config_to_json(const ForestConfig& cfg) {
  json j{
      {"task", task_to_json(cfg.task)},
      {"trees", cfg.trees},
      {"max_depth", cfg.max_depth},
      {"min_leaf", cfg.min_leaf},
      {"mtry", cfg.mtry},
      {"sketch_levels", cfg.sketch_levels},
      {"shortlist_size", cfg.shortlist_size},
      {"mode", mode_name(cfg.mode)},
      {"include_h", cfg.include_h},
      {"client_fraction", cfg.client_fraction},
      {"min_gain", cfg.min_gain},
      {"bootstrap", cfg.bootstrap},
      {"dedup_candidates", cfg.dedup_candidates},
      {"seed", cfg.seed},
  };
  if (cfg.impurity) j["impurity"] = impurity_name(*cfg.impurity);
  return j;
}

ForestConfig config_from_json(const json& j) {
  ForestConfig cfg;
  cfg.task = task_from_json(j.at("task"));
  cfg.trees = j.at("trees").get<int>();
  cfg.max_depth = j.at("max_depth").get<int>();
  cfg.min_leaf = j.at("min_leaf").get<std::int64_t>();
  cfg.mtry = j.at("mtry").get<int>();
  cfg.sketch_levels = j.at("sketch_levels").get<int>();
  cfg.shortlist_size = j.at("shortlist_size").get<int>();
  cfg.mode = mode_from_name(j.at("mode").get<std::string>());
  cfg.include_h = j.at("include_h").get<bool>();
  cfg.client_fraction = j.at("client_fraction").get<double>();
  cfg.min_gain = j.at("min_gain").get<double>();
  cfg.bootstrap = j.at("bootstrap").get<bool>();
  cfg.dedup_candidates = j.at("dedup_candidates").get<bool>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("impurity")) {
    cfg.impurity = impurity_from_name(j.at("impurity").get<std::string>());
  }
  return cfg;
}

json node_to_json(const TreeNode& node, const TaskKind& task) {
  json j;
  if (node.leaf) {
    j["value"] = node.prediction;
    if (task.is_classification()) {
      j["counts"] = node.stats.counts;
    } else {
      j["n"] = node.stats.n;
      j["sum_y"] = node.stats.sum_y;
      j["sum_yy"] = node.stats.sum_yy;
    }
    return j;
  }
  switch (node.split.kind) {
    case SplitKind::kNumeric:
      j["feature"] = node.split.feature;
      j["threshold"] = node.split.threshold;
      break;
    case SplitKind::kCategorical:
      j["feature"] = node.split.feature;
      j["left_categories"] = node.split.left_set;
      break;
    case SplitKind::kClientSet:
      j["left_clients"] = node.split.left_set;
      break;
  }
  j["left"] = node.left;
  j["right"] = node.right;
  j["n_left"] = node.n_left;
  j["n_right"] = node.n_right;
  return j;
}

TreeNode node_from_json(const json& j, const TaskKind& task) {
  TreeNode node;
  if (j.contains("value")) {
    node.leaf = true;
    node.prediction = j.at("value").get<double>();
    node.stats = SuffStats::zero(task);
    if (task.is_classification()) {
      node.stats.counts = j.at("counts").get<std::vector<std::int64_t>>();
      node.stats.n = 0;
      for (auto c : node.stats.counts) node.stats.n += c;
    } else {
      node.stats.n = j.at("n").get<std::int64_t>();
      node.stats.sum_y = j.at("sum_y").get<double>();
      node.stats.sum_yy = j.at("sum_yy").get<double>();
    }
    return node;
  }
  node.leaf = false;
  if (j.contains("left_clients")) {
    node.split = SplitCandidate::client_set(
        j.at("left_clients").get<std::vector<int>>());
  } else if (j.contains("left_categories")) {
    node.split = SplitCandidate::categorical(
        j.at("feature").get<int>(),
        j.at("left_categories").get<std::vector<int>>());
  } else {
    node.split = SplitCandidate::numeric(j.at("feature").get<int>(),
                                         j.at("threshold").get<double>());
  }
  node.left = j.at("left").get<std::int32_t>();
  node.right = j.at("right").get<std::int32_t>();
  node.n_left = j.at("n_left").get<std::int64_t>();
  node.n_right = j.at("n_right").get<std::int64_t>();
  return node;
}

}  // namespace

std::string model_to_json(const Forest& forest) {
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["task"] = task_to_json(forest.task);
  j["impurity"] = impurity_name(forest.impurity);
  j["num_features"] = forest.num_features;
  j["config"] = config_to_json(forest.config);
  j["ledger"] = {
      {"scalars_up", forest.ledger.scalars_up},
      {"scalars_down", forest.ledger.scalars_down},
      {"rounds", forest.ledger.rounds},
      {"levels", forest.ledger.levels},
  };
  json trees = json::array();
  for (const auto& tree : forest.trees) {
    json t;
    if (!tree.h_root_order.empty()) t["h_root_order"] = tree.h_root_order;
    json nodes = json::array();
    for (const auto& node : tree.nodes) {
      nodes.push_back(node_to_json(node, forest.task));
    }
    t["nodes"] = std::move(nodes);
    trees.push_back(std::move(t));
  }
  j["trees"] = std::move(trees);
  return j.dump(2) + "\n";
}

Forest model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kFormat) {
      throw DataError("not a fedforest model file");
    }
    if (j.at("version").get<int>() != kVersion) {
      throw DataError("unsupported model version");
    }
    Forest forest;
    forest.task = task_from_json(j.at("task"));
    forest.impurity = impurity_from_name(j.at("impurity").get<std::string>());
    forest.num_features = j.at("num_features").get<std::size_t>();
    forest.config = config_from_json(j.at("config"));
    const auto& ledger = j.at("ledger");
    forest.ledger.scalars_up = ledger.at("scalars_up").get<std::int64_t>();
    forest.ledger.scalars_down = ledger.at("scalars_down").get<std::int64_t>();
    forest.ledger.rounds = ledger.at("rounds").get<std::int64_t>();
    forest.ledger.levels = ledger.at("levels").get<int>();
    for (const auto& t : j.at("trees")) {
      Tree tree;
      if (t.contains("h_root_order")) {
        tree.h_root_order = t.at("h_root_order").get<std::vector<int>>();
      }
      for (const auto& n : t.at("nodes")) {
        tree.nodes.push_back(node_from_json(n, forest.task));
      }
      if (tree.nodes.empty()) throw DataError("tree without nodes");
      forest.trees.push_back(std::move(tree));
    }
    return forest;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  }
}

}  // namespace fedforest
