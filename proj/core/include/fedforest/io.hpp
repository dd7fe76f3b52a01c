#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fedforest/config.hpp"
#include "fedforest/dataset.hpp"
#include "fedforest/forest.hpp"

namespace fedforest {

// Dataset files are CSV with the fixed header
//   client_id,x0,...,x{d-1},y
// and one row per sample. Doubles are written with %.17g, so a
// read-write cycle reproduces the file byte for byte.
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const std::string& path, const Dataset& data);

Forest read_model(const std::string& path);
void write_model(const std::string& path, const Forest& forest);

// Config files hold `key = value` lines; '#' starts a comment, blank
// lines are skipped, unknown keys raise ConfigError. Values use the same
// spellings as the command line (e.g. task = classification:3).
struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};
std::vector<ConfigEntry> parse_config_file(const std::string& path);
void apply_config_entry(ForestConfig& config, const std::string& key,
                        const std::string& value);
void load_config_file(ForestConfig& config, const std::string& path);

// %.17g rendering used for every double leaving this codebase.
std::string format_double(double value);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace fedforest
