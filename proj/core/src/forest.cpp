#include "fedforest/forest.hpp"

#include <algorithm>
#include <string>

namespace fedforest {

bool Forest::uses_client_splits() const {
  for (const auto& tree : trees) {
    if (!tree.h_root_order.empty()) return true;
    for (const auto& node : tree.nodes) {
      if (!node.leaf && node.split.kind == SplitKind::kClientSet) return true;
    }
  }
  return false;
}

namespace {

// -1 = left, +1 = right, 0 = client unknown (fallback applies).
int route(const Tree& tree, const TreeNode& node, std::size_t num_features,
          std::span<const double> x, std::optional<int> h, bool strict_h) {
  const SplitCandidate& split = node.split;
  if (split.kind == SplitKind::kNumeric &&
      split.feature < static_cast<int>(num_features)) {
    return x[static_cast<std::size_t>(split.feature)] <= split.threshold ? -1 : 1;
  }
  // Client-dependent branch: a client-set split or the encoded client
  // feature appended by centralized training.
  if (!h.has_value()) {
    if (strict_h) throw DataError("prediction requires a client id at a client-based split");
    return 0;
  }
  if (split.kind == SplitKind::kClientSet) {
    return std::binary_search(split.left_set.begin(), split.left_set.end(), *h) ? -1 : 1;
  }
  const auto it = std::find(tree.h_root_order.begin(), tree.h_root_order.end(), *h);
  if (it == tree.h_root_order.end()) {
    if (strict_h) throw DataError("client id " + std::to_string(*h) + " was not seen in training");
    return 0;
  }
  const double rank = static_cast<double>(it - tree.h_root_order.begin());
  return rank <= split.threshold ? -1 : 1;
}

}  // namespace

double predict_tree(const Tree& tree, std::size_t num_features, std::span<const double> x,
                    std::optional<int> h, bool strict_h) {
  if (tree.nodes.empty()) throw DataError("empty tree");
  std::int32_t at = 0;
  while (!tree.nodes[static_cast<std::size_t>(at)].leaf) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(at)];
    int dir = route(tree, node, num_features, x, h, strict_h);
    if (dir == 0) dir = node.n_left >= node.n_right ? -1 : 1;  // larger child
    at = dir < 0 ? node.left : node.right;
  }
  return tree.nodes[static_cast<std::size_t>(at)].prediction;
}

double predict(const Forest& forest, std::span<const double> x, std::optional<int> h,
               bool strict_h) {
  if (x.size() != forest.num_features) {
    throw DataError("row has " + std::to_string(x.size()) + " features, model expects " +
                    std::to_string(forest.num_features));
  }
  if (forest.trees.empty()) throw DataError("empty forest");
  if (!forest.task.is_classification()) {
    double sum = 0.0;
    for (const auto& tree : forest.trees) {
      sum += predict_tree(tree, forest.num_features, x, h, strict_h);
    }
    return sum / static_cast<double>(forest.trees.size());
  }
  std::vector<std::int64_t> votes(static_cast<std::size_t>(forest.task.num_categories), 0);
  for (const auto& tree : forest.trees) {
    const auto c = static_cast<std::size_t>(predict_tree(tree, forest.num_features, x, h, strict_h));
    votes.at(c) += 1;
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c) {
    if (votes[c] > votes[best]) best = c;
  }
  return static_cast<double>(best);
}

std::vector<double> vote_shares(const Forest& forest, std::span<const double> x,
                                std::optional<int> h) {
  if (!forest.task.is_classification()) {
    throw ConfigError("vote shares require a classification forest");
  }
  std::vector<double> shares(static_cast<std::size_t>(forest.task.num_categories), 0.0);
  for (const auto& tree : forest.trees) {
    const auto c = static_cast<std::size_t>(predict_tree(tree, forest.num_features, x, h));
    shares.at(c) += 1.0;
  }
  for (double& s : shares) s /= static_cast<double>(forest.trees.size());
  return shares;
}

std::vector<double> predict_all(const Forest& forest, const Dataset& data, bool strict_h) {
  std::vector<double> out;
  out.reserve(data.num_rows());
  std::vector<double> x(data.num_features());
  for (std::size_t i = 0; i < data.num_rows(); ++i) {
    for (std::size_t j = 0; j < data.num_features(); ++j) x[j] = data.columns[j][i];
    std::optional<int> h;
    if (i < data.client_id.size()) h = data.client_id[i];
    out.push_back(predict(forest, x, h, strict_h));
  }
  return out;
}

}  // namespace fedforest
