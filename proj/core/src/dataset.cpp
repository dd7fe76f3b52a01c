#include "fedforest/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

namespace fedforest {

std::vector<double> Dataset::row(std::size_t i) const {
  std::vector<double> out(columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) out[j] = columns[j][i];
  return out;
}

Dataset pool_shards(std::span<const ClientShard> shards) {
  std::vector<const ClientShard*> ordered;
  for (const auto& s : shards) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const ClientShard* a, const ClientShard* b) { return a->client_id < b->client_id; });

  Dataset out;
  if (ordered.empty()) return out;
  out.columns.resize(ordered.front()->num_features());
  for (const ClientShard* s : ordered) {
    for (std::size_t j = 0; j < out.columns.size(); ++j) {
      out.columns[j].insert(out.columns[j].end(), s->columns[j].begin(), s->columns[j].end());
    }
    out.y.insert(out.y.end(), s->y.begin(), s->y.end());
    out.client_id.insert(out.client_id.end(), s->num_rows(), s->client_id);
  }
  return out;
}

std::vector<ClientShard> split_by_client(const Dataset& data) {
  std::map<int, ClientShard> by_id;
  for (std::size_t i = 0; i < data.num_rows(); ++i) {
    auto& shard = by_id[data.client_id[i]];
    if (shard.columns.empty()) {
      shard.client_id = data.client_id[i];
      shard.columns.resize(data.num_features());
    }
    for (std::size_t j = 0; j < data.num_features(); ++j) {
      shard.columns[j].push_back(data.columns[j][i]);
    }
    shard.y.push_back(data.y[i]);
  }
  std::vector<ClientShard> out;
  out.reserve(by_id.size());
  for (auto& [id, shard] : by_id) out.push_back(std::move(shard));
  return out;
}

void validate_shards(std::span<const ClientShard> shards, const TaskKind& task) {
  if (shards.empty()) throw DataError("no client shards");
  std::set<int> ids;
  const std::size_t d = shards.front().num_features();
  if (d == 0) throw DataError("shards carry no features");
  std::size_t total_rows = 0;
  for (const auto& s : shards) {
    if (!ids.insert(s.client_id).second) {
      throw DataError("duplicate client id " + std::to_string(s.client_id));
    }
    if (s.num_features() != d) {
      throw DataError("client " + std::to_string(s.client_id) + " has " +
                      std::to_string(s.num_features()) + " features, expected " +
                      std::to_string(d));
    }
    for (const auto& col : s.columns) {
      if (col.size() != s.num_rows()) {
        throw DataError("ragged columns in client " + std::to_string(s.client_id));
      }
      for (double v : col) {
        if (!std::isfinite(v)) {
          throw DataError("non-finite feature value in client " + std::to_string(s.client_id));
        }
      }
    }
    for (double v : s.y) {
      if (!std::isfinite(v)) {
        throw DataError("non-finite outcome in client " + std::to_string(s.client_id));
      }
      if (task.is_classification()) {
        const auto c = static_cast<std::int64_t>(v);
        if (static_cast<double>(c) != v || c < 0 || c >= task.num_categories) {
          throw DataError("outcome " + std::to_string(v) + " is not a category in [0, " +
                          std::to_string(task.num_categories) + ")");
        }
      }
    }
    total_rows += s.num_rows();
  }
  if (total_rows == 0) throw DataError("all client shards are empty");
}

}  // namespace fedforest
