#pragma once

#include <span>
#include <vector>

#include "fedforest/config.hpp"
#include "fedforest/dataset.hpp"
#include "fedforest/forest.hpp"

namespace fedforest {

// Centralized forest over the pooled rows, grown depth-first with exact
// midpoint candidates. Shares the bootstrap / feature-subset schedule and
// the tie-breaking rules with the federated trainer, so a federated run
// can be compared against it node by node. with_h appends the client id,
// encoded by each tree's root-level group ordering, as one extra feature
// that is always searched.
Forest fit_centralized(std::span<const ClientShard> shards, const ForestConfig& config,
                       bool with_h = false);

// One forest per client, trained on that client's rows alone (the client
// is re-indexed to 0, so equal shards yield equal forests).
struct LocalModels {
  std::vector<int> client_ids;  // sorted
  std::vector<Forest> forests;  // aligned with client_ids

  const Forest& for_client(int id) const;
};

LocalModels fit_local(std::span<const ClientShard> shards, const ForestConfig& config);

// Each row predicted by its own client's model; rows from clients
// without a model fall back to the pooled ensemble of all local trees.
std::vector<double> predict_own_client(const LocalModels& models, const Dataset& data);

// All local trees pooled into one forest (votes / averages span every
// client's trees).
Forest local_ensemble(const LocalModels& models);

}  // namespace fedforest
