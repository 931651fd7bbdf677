#include <cmath>
#include <stdexcept>

#include "benefitml/classifier.hpp"
#include "benefitml/error.hpp"
#include "benefitml/parallel.hpp"
#include "benefitml/rng.hpp"

namespace benefitml {

namespace forest {

namespace {

std::size_t subset_size(FeatureSubset rule, std::size_t d) {
  auto at_least_one = [](double v) { return std::max<std::size_t>(1, static_cast<std::size_t>(v)); };
  switch (rule) {
    case FeatureSubset::all: return 0;
    case FeatureSubset::sqrt: return at_least_one(std::floor(std::sqrt(static_cast<double>(d))));
    case FeatureSubset::log2: return at_least_one(std::floor(std::log2(static_cast<double>(std::max<std::size_t>(d, 1)))));
    case FeatureSubset::onethird: return at_least_one(std::floor(static_cast<double>(d) / 3.0));
  }
  return 0;
}

}  // namespace

// Each tree draws its bootstrap counts and split subsets from its own seed,
// derive_seed(seed, tree index), so the forest is independent of scheduling.
TrainedClassifier train(const Dataset& data, const ClassifierParams& params, unsigned threads) {
  const std::size_t n = data.rows;
  const TreeConfig cfg{params.max_depth, params.min_instances_per_node,
                       subset_size(params.feature_subset, data.cols)};
  std::vector<DecisionTree> trees(static_cast<std::size_t>(params.num_trees));
  parallel_for(trees.size(), threads, [&](std::size_t t) {
    Rng rng(derive_seed(params.seed, t));
    std::vector<std::uint32_t> counts;
    if (params.bootstrap) {
      counts.assign(n, 0);
      for (std::size_t i = 0; i < n; ++i) ++counts[rng.below(n)];
    }
    trees[t] = build_classification_tree(data, counts, cfg, &rng);
  });
  return TrainedClassifier{params, data.cols, ForestModel{std::move(trees)}};
}

}  // namespace forest

namespace gbt {

namespace {

double deviance(double y, double f) {
  const double t = -2.0 * y * f;
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

}  // namespace

// Binomial-deviance boosting with labels mapped to +-1: F0 = 1/2 ln(p / (1 - p)),
// each stage fits a regression tree to 2y / (1 + exp(2yF)) and adds
// stepSize times its output.
TrainedClassifier train(const Dataset& data, const ClassifierParams& params) {
  const std::size_t n = data.rows;
  const std::size_t pos = data.positives();
  if (pos == 0 || pos == n)
    throw DataError("gradient boosting needs both classes in the training data");
  const double p = static_cast<double>(pos) / static_cast<double>(n);

  GbtModel model;
  model.f0 = 0.5 * std::log(p / (1.0 - p));
  model.learning_rate = params.step_size;
  const TreeConfig cfg{params.max_depth, params.min_instances_per_node, 0};

  std::vector<double> f(n, model.f0);
  std::vector<double> residual(n);
  for (int m = 0; m < params.max_iter; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      const double y = data.y[i] == 1 ? 1.0 : -1.0;
      residual[i] = 2.0 * y / (1.0 + std::exp(2.0 * y * f[i]));
    }
    DecisionTree tree = build_regression_tree(data, residual, cfg);
    for (std::size_t i = 0; i < n; ++i) f[i] += model.learning_rate * tree.predict(data.row(i));
    model.trees.push_back(std::move(tree));
  }
  return TrainedClassifier{params, data.cols, std::move(model)};
}

std::vector<double> training_loss_curve(const GbtModel& model, const Dataset& data) {
  std::vector<double> f(data.rows, model.f0);
  std::vector<double> curve;
  auto mean_loss = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < data.rows; ++i) s += deviance(data.y[i] == 1 ? 1.0 : -1.0, f[i]);
    return s / static_cast<double>(data.rows);
  };
  curve.push_back(mean_loss());
  for (const auto& tree : model.trees) {
    for (std::size_t i = 0; i < data.rows; ++i) f[i] += model.learning_rate * tree.predict(data.row(i));
    curve.push_back(mean_loss());
  }
  return curve;
}

}  // namespace gbt

}  // namespace benefitml
