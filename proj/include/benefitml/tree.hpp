#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

#include "benefitml/dataset.hpp"
#include "benefitml/rng.hpp"

namespace benefitml {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // rows with x[feature] <= threshold go left
  int left = -1;
  int right = -1;
  double impurity_decrease = 0.0;  // parent impurity minus weighted child impurity
  double weight = 0.0;  // weighted sample count reaching the node
  double value = 0.0;  // P(class 1) for classification, mean target for regression
  double count0 = 0.0;  // classification only
  double count1 = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
};

// Flat binary tree; node 0 is the root.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  const TreeNode& leaf_for(std::span<const double> x) const;
  double predict(std::span<const double> x) const { return leaf_for(x).value; }
  int depth() const;
  // sum over splits of weight * impurity_decrease per feature, normalized to
  // sum 1 (all zeros when the tree has no informative split).
  std::vector<double> importances(std::size_t num_features) const;
};

struct TreeConfig {
  int max_depth = 5;
  int min_instances_per_node = 1;
  // Features examined at each split; 0 or >= cols means all of them.
  std::size_t features_per_split = 0;
};

// CART with Gini impurity. `multiplicity` gives integer row weights (bootstrap
// counts; empty means 1 each). Thresholds are midpoints between consecutive
// distinct values; the best split maximizes the impurity decrease with ties
// going to the lower feature index, then the lower threshold. `rng` is only
// consulted when a feature subset is drawn.
DecisionTree build_classification_tree(const Dataset& data, std::span<const std::uint32_t> multiplicity,
                                       const TreeConfig& config, Rng* rng = nullptr);

// Variance-reduction regression tree on real targets (one per row of `data`).
DecisionTree build_regression_tree(const Dataset& data, std::span<const double> targets,
                                   const TreeConfig& config);

nlohmann::json tree_to_json(const DecisionTree& tree);
DecisionTree tree_from_json(const nlohmann::json& j);

}  // namespace benefitml
