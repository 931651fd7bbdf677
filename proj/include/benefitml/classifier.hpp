#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "benefitml/dataset.hpp"
#include "benefitml/feature_vector.hpp"
#include "benefitml/tree.hpp"

namespace benefitml {

enum class Family { LR, DT, RF, FM, GBT, SVM };

inline constexpr Family kAllFamilies[] = {Family::LR, Family::DT, Family::RF,
                                          Family::FM, Family::GBT, Family::SVM};

// Lower-case tag used on the command line and in files: lr, dt, rf, fm, gbt, svm.
std::string_view family_tag(Family f);
std::string_view family_display_name(Family f);
Family family_from_tag(std::string_view tag);

enum class FeatureSubset { all, sqrt, log2, onethird };
std::string_view to_string(FeatureSubset s);
FeatureSubset feature_subset_from_string(std::string_view s);

// One parameter struct for every family; each family reads its own fields
// (see parameter_names). Use ClassifierParams::defaults to get family defaults.
struct ClassifierParams {
  Family family = Family::LR;
  double threshold = 0.5;
  std::uint64_t seed = 1;

  // LR, SVM, FM; GBT boosting rounds
  int max_iter = 10;
  double reg_param = 0.1;
  double tol = 1e-6;
  bool fit_intercept = true;
  bool standardization = true;
  // GBT learning rate, FM step, SVM fixed step (regParam = 0)
  double step_size = 0.1;

  // trees
  int max_depth = 5;
  int min_instances_per_node = 1;
  int num_trees = 100;
  FeatureSubset feature_subset = FeatureSubset::sqrt;
  bool bootstrap = true;

  // FM
  int factor_size = 8;
  double init_std = 0.01;
  int mini_batch_size = 64;
  bool fit_linear = true;

  static ClassifierParams defaults(Family family);
  void validate() const;

  friend bool operator==(const ClassifierParams&, const ClassifierParams&) = default;
};

// Names accepted by set_param / grids for a family (camelCase).
const std::vector<std::string>& parameter_names(Family family);
void set_param(ClassifierParams& params, const std::string& name, const nlohmann::json& value);
nlohmann::json get_param(const ClassifierParams& params, const std::string& name);

nlohmann::json params_to_json(const ClassifierParams& params);
ClassifierParams params_from_json(const nlohmann::json& j);

struct Prediction {
  double raw_score = 0.0;
  std::optional<double> probability;  // absent for SVM
  int label = 0;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

struct LinearModel {
  std::vector<double> weights;
  double intercept = 0.0;

  double margin(std::span<const double> x) const;
};

struct LogisticModel {
  LinearModel linear;
};

struct SvmModel {
  LinearModel linear;
};

struct TreeModel {
  DecisionTree tree;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
};

struct GbtModel {
  double f0 = 0.0;
  double learning_rate = 0.1;
  std::vector<DecisionTree> trees;

  // F0 + learning_rate * (sum of the first `stages` tree outputs).
  double margin(std::span<const double> x, std::size_t stages) const;
  double margin(std::span<const double> x) const { return margin(x, trees.size()); }
};

struct FmModel {
  double w0 = 0.0;
  std::vector<double> w;
  std::vector<double> v;  // num_features x factor_size, row-major
  std::size_t factor_size = 0;

  // w0 + <w, x> + 1/2 sum_f [(sum_i v_if x_i)^2 - sum_i v_if^2 x_i^2], O(k * nnz).
  double score(std::span<const double> x) const;
};

using ModelBody = std::variant<LogisticModel, TreeModel, ForestModel, FmModel, GbtModel, SvmModel>;

struct TrainedClassifier {
  ClassifierParams params;
  std::size_t num_features = 0;
  ModelBody body;

  Family family() const noexcept { return params.family; }
};

// `threads` only affects wall-clock time; results are identical for any value.
TrainedClassifier train(const Dataset& data, const ClassifierParams& params, unsigned threads = 1);

Prediction predict(const TrainedClassifier& model, std::span<const double> features);
Prediction predict(const TrainedClassifier& model, const FeatureVector& features);

// DT, RF and GBT only; throws std::invalid_argument for other families.
std::vector<double> feature_importances(const TrainedClassifier& model);
// Nonnegative and summing to 1 within `tol` (or all zero).
bool valid_importances(std::span<const double> weights, double tol = 1e-9);

nlohmann::json model_to_json(const TrainedClassifier& model);
TrainedClassifier model_from_json(const nlohmann::json& j);

double sigmoid(double z);

// Objectives and gradients, exposed for gradient checking. All take labels
// in {0,1} from `data`; `reg` multiplies 1/2 ||w||^2 (the intercept is not
// regularized).
namespace logistic {
double objective(const LinearModel& m, const Dataset& data, double reg);
LinearModel gradient(const LinearModel& m, const Dataset& data, double reg);
TrainedClassifier train(const Dataset& data, const ClassifierParams& params);
}  // namespace logistic

namespace svm {
double objective(const LinearModel& m, const Dataset& data, double reg);
// A subgradient; it is the gradient wherever no margin sits exactly at 1.
LinearModel subgradient(const LinearModel& m, const Dataset& data, double reg);
TrainedClassifier train(const Dataset& data, const ClassifierParams& params);
}  // namespace svm

namespace fm {
// Mean logistic loss over `rows` (all rows when empty) plus reg/2 (||w||^2 + ||V||^2).
double objective(const FmModel& m, const Dataset& data, double reg,
                 std::span<const std::size_t> rows = {});
FmModel gradient(const FmModel& m, const Dataset& data, double reg,
                 std::span<const std::size_t> rows = {});
TrainedClassifier train(const Dataset& data, const ClassifierParams& params);
}  // namespace fm

namespace forest {
TrainedClassifier train(const Dataset& data, const ClassifierParams& params, unsigned threads);
}

namespace gbt {
TrainedClassifier train(const Dataset& data, const ClassifierParams& params);
// Mean log(1 + exp(-2 y F)) (y in +-1) after each boosting stage, stage 0 = F0.
std::vector<double> training_loss_curve(const GbtModel& model, const Dataset& data);
}  // namespace gbt

}  // namespace benefitml
