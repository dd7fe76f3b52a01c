#include "fedforest/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "fedforest/serialize.hpp"

namespace fedforest {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  if (t.empty()) throw DataError(where + ": empty number");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE) {
    throw DataError(where + ": bad number '" + t + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  if (t.empty()) throw DataError(where + ": empty integer");
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size() || errno == ERANGE) {
    throw DataError(where + ": bad integer '" + t + "'");
  }
  return v;
}

bool parse_bool(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ConfigError(where + ": expected true/false, got '" + t + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << content;
  if (!out) throw DataError("short write to " + path);
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_csv_line(line);
  if (header.size() < 3 || header.front() != "client_id" || header.back() != "y") {
    throw DataError(path + ": expected header client_id,x0,...,y");
  }
  const std::size_t d = header.size() - 2;
  for (std::size_t j = 0; j < d; ++j) {
    if (header[j + 1] != "x" + std::to_string(j)) {
      throw DataError(path + ": expected column x" + std::to_string(j) +
                      ", found '" + header[j + 1] + "'");
    }
  }

  Dataset data;
  data.columns.assign(d, {});
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string where = path + ":" + std::to_string(line_no);
    if (fields.size() != header.size()) {
      throw DataError(where + ": expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(fields.size()));
    }
    data.client_id.push_back(static_cast<int>(parse_int(fields[0], where)));
    for (std::size_t j = 0; j < d; ++j) {
      data.columns[j].push_back(parse_double(fields[j + 1], where));
    }
    data.y.push_back(parse_double(fields.back(), where));
  }
  if (data.y.empty()) throw DataError(path + ": no data rows");
  return data;
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ostringstream out;
  out << "client_id";
  for (std::size_t j = 0; j < data.num_features(); ++j) out << ",x" << j;
  out << ",y\n";
  for (std::size_t i = 0; i < data.num_rows(); ++i) {
    out << data.client_id[i];
    for (std::size_t j = 0; j < data.num_features(); ++j) {
      out << ',' << format_double(data.columns[j][i]);
    }
    out << ',' << format_double(data.y[i]) << '\n';
  }
  write_text_file(path, out.str());
}

Forest read_model(const std::string& path) {
  return model_from_json(read_text_file(path));
}

void write_model(const std::string& path, const Forest& forest) {
  write_text_file(path, model_to_json(forest));
}

void apply_config_entry(ForestConfig& config, const std::string& key,
                        const std::string& value) {
  const std::string k = trim(key);
  const std::string v = trim(value);
  const std::string where = "config key '" + k + "'";
  if (k == "task") {
    if (v == "regression") {
      config.task = TaskKind::regression();
    } else if (v.rfind("classification:", 0) == 0) {
      config.task = TaskKind::classification(
          static_cast<int>(parse_int(v.substr(15), where)));
    } else {
      throw ConfigError(where + ": expected regression or classification:K");
    }
  } else if (k == "impurity") {
    config.impurity = impurity_from_name(v);
  } else if (k == "trees") {
    config.trees = static_cast<int>(parse_int(v, where));
  } else if (k == "max_depth") {
    config.max_depth = static_cast<int>(parse_int(v, where));
  } else if (k == "min_leaf") {
    config.min_leaf = parse_int(v, where);
  } else if (k == "mtry") {
    config.mtry = static_cast<int>(parse_int(v, where));
  } else if (k == "sketch_levels") {
    config.sketch_levels = static_cast<int>(parse_int(v, where));
  } else if (k == "shortlist_size") {
    config.shortlist_size = static_cast<int>(parse_int(v, where));
  } else if (k == "mode") {
    config.mode = mode_from_name(v);
  } else if (k == "include_h") {
    config.include_h = parse_bool(v, where);
  } else if (k == "client_fraction") {
    config.client_fraction = parse_double(v, where);
  } else if (k == "min_gain") {
    config.min_gain = parse_double(v, where);
  } else if (k == "bootstrap") {
    config.bootstrap = parse_bool(v, where);
  } else if (k == "dedup_candidates") {
    config.dedup_candidates = parse_bool(v, where);
  } else if (k == "seed") {
    config.seed = static_cast<std::uint64_t>(parse_int(v, where));
  } else {
    throw ConfigError("unknown config key '" + k + "'");
  }
}

std::vector<ConfigEntry> parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::vector<ConfigEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string entry = trim(line);
    if (entry.empty()) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected key = value");
    }
    entries.push_back({trim(entry.substr(0, eq)), trim(entry.substr(eq + 1)), line_no});
  }
  return entries;
}

void load_config_file(ForestConfig& config, const std::string& path) {
  for (const auto& entry : parse_config_file(path)) {
    try {
      apply_config_entry(config, entry.key, entry.value);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(entry.line) + ": " + e.what());
    } catch (const DataError& e) {
      throw ConfigError(path + ":" + std::to_string(entry.line) + ": " + e.what());
    }
  }
}

}  // namespace fedforest
