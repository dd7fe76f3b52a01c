#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedforest/common.hpp"

namespace fedforest {

// One client's private table, stored column-major. Rows never leave the
// owning simulated client during training.
struct ClientShard {
  int client_id = 0;
  std::vector<std::vector<double>> columns;  // [feature][row]
  std::vector<double> y;

  std::size_t num_rows() const { return y.size(); }
  std::size_t num_features() const { return columns.size(); }
};

// A pooled table with per-row client of origin; used for evaluation sets
// and for centralized baselines.
struct Dataset {
  std::vector<std::vector<double>> columns;  // [feature][row]
  std::vector<double> y;
  std::vector<int> client_id;                // per row

  std::size_t num_rows() const { return y.size(); }
  std::size_t num_features() const { return columns.size(); }
  std::vector<double> row(std::size_t i) const;
};

// Concatenates shards (in client-id order) into one pooled table.
Dataset pool_shards(std::span<const ClientShard> shards);

// Groups pooled rows by client id, preserving within-client row order.
std::vector<ClientShard> split_by_client(const Dataset& data);

// Validates shard consistency (uniform feature count, non-empty, unique
// ids, finite values, category range for classification tasks).
void validate_shards(std::span<const ClientShard> shards, const TaskKind& task);

}  // namespace fedforest
