#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "fedforest/federation.hpp"
#include "fedforest/io.hpp"
#include "fedforest/metrics.hpp"
#include "fedforest/rng.hpp"

using namespace fedforest;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("fedforest-io-" + std::to_string(std::rand()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

Dataset sample_dataset(std::uint64_t seed, std::size_t rows) {
  Dataset data;
  data.columns.resize(3);
  auto rng = DeterministicRng::derive(seed, StreamTag::kGeneric, 700);
  for (std::size_t i = 0; i < rows; ++i) {
    for (auto& col : data.columns) col.push_back(rng.next_gaussian());
    data.y.push_back(rng.next_gaussian());
    data.client_id.push_back(static_cast<int>(i % 3));
  }
  return data;
}

}  // namespace

TEST_CASE("dataset files survive a read-write cycle byte for byte") {
  TempDir dir;
  Dataset data = sample_dataset(1, 40);
  // exercise values that stress decimal formatting
  data.columns[0][0] = 0.1;
  data.columns[1][0] = 1e-300;
  data.columns[2][0] = 123456789.123456789;
  data.y[0] = -0.0;

  const std::string first = dir.file("a.csv");
  const std::string second = dir.file("b.csv");
  write_dataset_csv(first, data);
  Dataset loaded = read_dataset_csv(first);
  write_dataset_csv(second, loaded);

  CHECK(read_text_file(first) == read_text_file(second));
  CHECK(loaded.columns == data.columns);
  CHECK(loaded.y == data.y);
  CHECK(loaded.client_id == data.client_id);

  const std::string text = read_text_file(first);
  CHECK(text.rfind("client_id,x0,x1,x2,y\n", 0) == 0);
}

TEST_CASE("dataset parse errors carry their location") {
  TempDir dir;
  const std::string path = dir.file("bad.csv");

  write_text_file(path, "client_id,x0,y\n0,1.5\n");
  CHECK_THROWS_AS(read_dataset_csv(path), DataError);

  write_text_file(path, "client_id,x0,y\n0,abc,1\n");
  CHECK_THROWS_AS(read_dataset_csv(path), DataError);

  write_text_file(path, "wrong,header\n");
  CHECK_THROWS_AS(read_dataset_csv(path), DataError);

  CHECK_THROWS_AS(read_dataset_csv(dir.file("missing.csv")), DataError);
}

TEST_CASE("model files round-trip through disk") {
  TempDir dir;
  Dataset data = sample_dataset(5, 60);
  auto shards = split_by_client(data);
  ForestConfig cfg;
  cfg.trees = 3;
  cfg.max_depth = 3;
  cfg.min_leaf = 2;
  cfg.seed = 9;
  Forest forest = fit_forest(shards, cfg);

  const std::string path = dir.file("model.json");
  write_model(path, forest);
  Forest loaded = read_model(path);
  CHECK(loaded.trees.size() == forest.trees.size());
  for (std::size_t i = 0; i < data.num_rows(); ++i) {
    CHECK(predict(loaded, data.row(i)) == predict(forest, data.row(i)));
  }
  CHECK_THROWS_AS(read_model(dir.file("missing.json")), DataError);

  write_text_file(path, "{not json");
  CHECK_THROWS_AS(read_model(path), DataError);
}

TEST_CASE("config files parse with comments and precise errors") {
  TempDir dir;
  const std::string path = dir.file("run.conf");
  write_text_file(path,
                  "# training settings\n"
                  "trees = 7\n"
                  "\n"
                  "mode = fed-histogram   # candidate strategy\n"
                  "min_leaf = 4\n"
                  "task = classification:3\n");

  auto entries = parse_config_file(path);
  REQUIRE(entries.size() == 4);
  CHECK(entries[0].key == "trees");
  CHECK(entries[0].value == "7");
  CHECK(entries[0].line == 2);
  CHECK(entries[1].value == "fed-histogram");

  ForestConfig cfg;
  load_config_file(cfg, path);
  CHECK(cfg.trees == 7);
  CHECK(cfg.mode == Mode::kFedHistogram);
  CHECK(cfg.min_leaf == 4);
  CHECK(cfg.task == TaskKind::classification(3));

  write_text_file(path, "not_a_key = 1\n");
  CHECK_THROWS_AS(load_config_file(cfg, path), ConfigError);

  write_text_file(path, "trees\n");
  CHECK_THROWS_AS(parse_config_file(path), ConfigError);

  write_text_file(path, "trees = zero\n");
  CHECK_THROWS_AS(load_config_file(cfg, path), ConfigError);
}

TEST_CASE("config entries reject invalid values") {
  ForestConfig cfg;
  apply_config_entry(cfg, "mtry", "3");
  CHECK(cfg.mtry == 3);
  apply_config_entry(cfg, "include_h", "true");
  CHECK(cfg.include_h);
  apply_config_entry(cfg, "mode", "verify-midpoints");
  CHECK(cfg.mode == Mode::kVerifyMidpoints);
  CHECK_THROWS_AS(apply_config_entry(cfg, "mode", "psychic"), ConfigError);
  CHECK_THROWS_AS(apply_config_entry(cfg, "task", "classification:1"), ConfigError);
  // range checks live in validate, not in parsing
  apply_config_entry(cfg, "mode", "exact-quantiles");
  apply_config_entry(cfg, "trees", "-2");
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("doubles render with full precision") {
  CHECK(format_double(0.5) == "0.5");
  // 17 significant digits, enough for an exact value round trip
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(-0.0) == "-0");
  const double third = 1.0 / 3.0;
  CHECK(std::stod(format_double(third)) == third);
}

TEST_CASE("metric values") {
  std::vector<double> pred{1.0, 2.0, 3.0};
  std::vector<double> truth{1.0, 2.0, 5.0};
  CHECK(mse(pred, truth) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));

  // SST of truth around mean 8/3; SSE = 4
  const double sst = (1 - 8.0 / 3) * (1 - 8.0 / 3) + (2 - 8.0 / 3) * (2 - 8.0 / 3) +
                     (5 - 8.0 / 3) * (5 - 8.0 / 3);
  CHECK(r_squared(pred, truth) == doctest::Approx(1.0 - 4.0 / sst).epsilon(1e-12));
  CHECK(r_squared(truth, truth) == doctest::Approx(1.0));

  std::vector<double> labels{0.0, 1.0, 1.0, 0.0};
  std::vector<double> votes{0.0, 1.0, 1.0, 1.0};
  CHECK(accuracy(votes, labels) == doctest::Approx(0.75));

  // one positive above both negatives, one tied with a negative:
  // pairs (2x2): (0.9,0.1)=1 (0.9,0.4)=1 (0.4,0.1)=1 (0.4,0.4)=0.5
  std::vector<double> scores{0.1, 0.9, 0.4, 0.4};
  std::vector<double> binary{0.0, 1.0, 1.0, 0.0};
  CHECK(auc(scores, binary) == doctest::Approx(3.5 / 4.0).epsilon(1e-12));

  // degenerate labels fall back to 0.5
  CHECK(auc(scores, std::vector<double>{1.0, 1.0, 1.0, 1.0}) == 0.5);
}
