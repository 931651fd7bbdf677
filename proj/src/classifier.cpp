#include "benefitml/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "benefitml/error.hpp"

namespace benefitml {

using nlohmann::json;

std::string_view family_tag(Family f) {
  switch (f) {
    case Family::LR: return "lr";
    case Family::DT: return "dt";
    case Family::RF: return "rf";
    case Family::FM: return "fm";
    case Family::GBT: return "gbt";
    case Family::SVM: return "svm";
  }
  return "?";
}

std::string_view family_display_name(Family f) {
  switch (f) {
    case Family::LR: return "LR";
    case Family::DT: return "DT";
    case Family::RF: return "RF";
    case Family::FM: return "FM";
    case Family::GBT: return "GBT";
    case Family::SVM: return "SVM";
  }
  return "?";
}

Family family_from_tag(std::string_view tag) {
  std::string t(tag);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  for (Family f : kAllFamilies)
    if (family_tag(f) == t) return f;
  throw std::invalid_argument("unknown model family '" + std::string(tag) +
                              "' (expected one of lr, dt, rf, fm, gbt, svm)");
}

std::string_view to_string(FeatureSubset s) {
  switch (s) {
    case FeatureSubset::all: return "all";
    case FeatureSubset::sqrt: return "sqrt";
    case FeatureSubset::log2: return "log2";
    case FeatureSubset::onethird: return "onethird";
  }
  return "?";
}

FeatureSubset feature_subset_from_string(std::string_view s) {
  if (s == "all") return FeatureSubset::all;
  if (s == "sqrt" || s == "auto") return FeatureSubset::sqrt;
  if (s == "log2") return FeatureSubset::log2;
  if (s == "onethird") return FeatureSubset::onethird;
  throw std::invalid_argument("unknown featureSubsetStrategy '" + std::string(s) + "'");
}

ClassifierParams ClassifierParams::defaults(Family family) {
  ClassifierParams p;
  p.family = family;
  switch (family) {
    case Family::LR:
      p.max_iter = 10;
      p.reg_param = 0.1;
      break;
    case Family::DT:
      p.max_depth = 5;
      break;
    case Family::RF:
      p.num_trees = 100;
      p.max_depth = 5;
      break;
    case Family::FM:
      p.max_iter = 20;
      p.reg_param = 0.0;
      p.step_size = 0.1;
      break;
    case Family::GBT:
      p.max_iter = 20;
      p.step_size = 0.1;
      p.max_depth = 5;
      break;
    case Family::SVM:
      p.max_iter = 100;
      p.reg_param = 0.0;
      p.step_size = 0.1;
      break;
  }
  return p;
}

void ClassifierParams::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  if (!(threshold > 0.0 && threshold < 1.0)) fail("threshold must lie in (0, 1)");
  if (max_iter < 1) fail("maxIter must be >= 1");
  if (!(reg_param >= 0.0)) fail("regParam must be >= 0");
  if (!(tol >= 0.0)) fail("tol must be >= 0");
  if (!(step_size >= 0.0) || !std::isfinite(step_size)) fail("stepSize must be finite and >= 0");
  if (max_depth < 1) fail("maxDepth must be >= 1");
  if (min_instances_per_node < 1) fail("minInstancesPerNode must be >= 1");
  if (num_trees < 1) fail("numTrees must be >= 1");
  if (factor_size < 1) fail("factorSize must be >= 1");
  if (!(init_std >= 0.0)) fail("initStd must be >= 0");
  if (mini_batch_size < 1) fail("miniBatchSize must be >= 1");
}

const std::vector<std::string>& parameter_names(Family family) {
  static const std::vector<std::string> lr{"maxIter", "regParam", "tol", "fitIntercept",
                                           "standardization", "threshold"};
  static const std::vector<std::string> dt{"maxDepth", "minInstancesPerNode", "threshold"};
  static const std::vector<std::string> rf{"numTrees", "maxDepth", "minInstancesPerNode",
                                           "featureSubsetStrategy", "bootstrap", "seed", "threshold"};
  static const std::vector<std::string> fm{"factorSize", "initStd", "stepSize", "maxIter",
                                           "regParam", "miniBatchSize", "fitIntercept", "fitLinear",
                                           "seed", "threshold"};
  static const std::vector<std::string> gbt{"maxIter", "stepSize", "maxDepth", "minInstancesPerNode",
                                            "seed", "threshold"};
  static const std::vector<std::string> svm{"regParam", "maxIter", "tol", "fitIntercept",
                                            "standardization", "stepSize"};
  switch (family) {
    case Family::LR: return lr;
    case Family::DT: return dt;
    case Family::RF: return rf;
    case Family::FM: return fm;
    case Family::GBT: return gbt;
    case Family::SVM: return svm;
  }
  return lr;
}

namespace {

void require_known(Family family, const std::string& name) {
  const auto& names = parameter_names(family);
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw std::invalid_argument("unknown parameter '" + name + "' for family " +
                                std::string(family_tag(family)));
}

int as_int(const json& v, const std::string& name) {
  if (!v.is_number()) throw std::invalid_argument(name + " must be a number");
  const double d = v.get<double>();
  if (d != std::floor(d)) throw std::invalid_argument(name + " must be an integer");
  return static_cast<int>(d);
}

double as_double(const json& v, const std::string& name) {
  if (!v.is_number()) throw std::invalid_argument(name + " must be a number");
  return v.get<double>();
}

bool as_bool(const json& v, const std::string& name) {
  if (!v.is_boolean()) throw std::invalid_argument(name + " must be true or false");
  return v.get<bool>();
}

}  // namespace

void set_param(ClassifierParams& p, const std::string& name, const json& v) {
  require_known(p.family, name);
  if (name == "threshold") p.threshold = as_double(v, name);
  else if (name == "seed") {
    if (!v.is_number_integer()) throw std::invalid_argument("seed must be an integer");
    p.seed = v.get<std::uint64_t>();
  }
  else if (name == "maxIter") p.max_iter = as_int(v, name);
  else if (name == "regParam") p.reg_param = as_double(v, name);
  else if (name == "tol") p.tol = as_double(v, name);
  else if (name == "fitIntercept") p.fit_intercept = as_bool(v, name);
  else if (name == "standardization") p.standardization = as_bool(v, name);
  else if (name == "stepSize") p.step_size = as_double(v, name);
  else if (name == "maxDepth") p.max_depth = as_int(v, name);
  else if (name == "minInstancesPerNode") p.min_instances_per_node = as_int(v, name);
  else if (name == "numTrees") p.num_trees = as_int(v, name);
  else if (name == "featureSubsetStrategy") {
    if (!v.is_string()) throw std::invalid_argument(name + " must be a string");
    p.feature_subset = feature_subset_from_string(v.get<std::string>());
  }
  else if (name == "bootstrap") p.bootstrap = as_bool(v, name);
  else if (name == "factorSize") p.factor_size = as_int(v, name);
  else if (name == "initStd") p.init_std = as_double(v, name);
  else if (name == "miniBatchSize") p.mini_batch_size = as_int(v, name);
  else if (name == "fitLinear") p.fit_linear = as_bool(v, name);
}

json get_param(const ClassifierParams& p, const std::string& name) {
  require_known(p.family, name);
  if (name == "threshold") return p.threshold;
  if (name == "seed") return p.seed;
  if (name == "maxIter") return p.max_iter;
  if (name == "regParam") return p.reg_param;
  if (name == "tol") return p.tol;
  if (name == "fitIntercept") return p.fit_intercept;
  if (name == "standardization") return p.standardization;
  if (name == "stepSize") return p.step_size;
  if (name == "maxDepth") return p.max_depth;
  if (name == "minInstancesPerNode") return p.min_instances_per_node;
  if (name == "numTrees") return p.num_trees;
  if (name == "featureSubsetStrategy") return std::string(to_string(p.feature_subset));
  if (name == "bootstrap") return p.bootstrap;
  if (name == "factorSize") return p.factor_size;
  if (name == "initStd") return p.init_std;
  if (name == "miniBatchSize") return p.mini_batch_size;
  if (name == "fitLinear") return p.fit_linear;
  return nullptr;
}

json params_to_json(const ClassifierParams& p) {
  json j{{"family", std::string(family_tag(p.family))}};
  for (const auto& name : parameter_names(p.family)) j[name] = get_param(p, name);
  return j;
}

ClassifierParams params_from_json(const json& j) {
  ClassifierParams p = ClassifierParams::defaults(family_from_tag(j.at("family").get<std::string>()));
  for (const auto& [key, value] : j.items()) {
    if (key == "family") continue;
    set_param(p, key, value);
  }
  p.validate();
  return p;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double LinearModel::margin(std::span<const double> x) const {
  double z = intercept;
  for (std::size_t i = 0; i < weights.size(); ++i) z += weights[i] * x[i];
  return z;
}

double GbtModel::margin(std::span<const double> x, std::size_t stages) const {
  double f = f0;
  for (std::size_t m = 0; m < stages && m < trees.size(); ++m) f += learning_rate * trees[m].predict(x);
  return f;
}

double FmModel::score(std::span<const double> x) const {
  double lin = w0;
  for (std::size_t i = 0; i < w.size(); ++i) lin += w[i] * x[i];
  double pair = 0.0;
  for (std::size_t f = 0; f < factor_size; ++f) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (x[i] == 0.0) continue;
      const double vx = v[i * factor_size + f] * x[i];
      s += vx;
      s2 += vx * vx;
    }
    pair += s * s - s2;
  }
  return lin + 0.5 * pair;
}

TrainedClassifier train(const Dataset& data, const ClassifierParams& params, unsigned threads) {
  params.validate();
  if (data.rows == 0) throw DataError("cannot train on an empty dataset");
  if (data.x.size() != data.rows * data.cols || data.y.size() != data.rows)
    throw DataError("dataset dimensions are inconsistent");
  for (double v : data.x)
    if (!std::isfinite(v)) throw DataError("non-finite feature value in training data");
  switch (params.family) {
    case Family::LR: return logistic::train(data, params);
    case Family::SVM: return svm::train(data, params);
    case Family::FM: return fm::train(data, params);
    case Family::GBT: return gbt::train(data, params);
    case Family::RF: return forest::train(data, params, threads);
    case Family::DT: {
      TreeConfig cfg{params.max_depth, params.min_instances_per_node, 0};
      return TrainedClassifier{params, data.cols, TreeModel{build_classification_tree(data, {}, cfg)}};
    }
  }
  throw std::logic_error("unhandled family");
}

Prediction predict(const TrainedClassifier& model, std::span<const double> x) {
  if (x.size() != model.num_features)
    throw DataError("feature dimension " + std::to_string(x.size()) + " does not match model (" +
                    std::to_string(model.num_features) + ")");
  for (double v : x)
    if (!std::isfinite(v)) throw DataError("non-finite feature value");
  const double thr = model.params.threshold;
  auto probabilistic = [thr](double raw, double p) { return Prediction{raw, p, p > thr ? 1 : 0}; };
  return std::visit(
      [&](const auto& body) -> Prediction {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, LogisticModel>) {
          const double z = body.linear.margin(x);
          return probabilistic(z, sigmoid(z));
        } else if constexpr (std::is_same_v<T, SvmModel>) {
          const double z = body.linear.margin(x);
          return Prediction{z, std::nullopt, z > 0.0 ? 1 : 0};
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          const double p = body.tree.predict(x);
          return probabilistic(p, p);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          double sum = 0.0;
          for (const auto& t : body.trees) sum += t.predict(x);
          const double p = sum / static_cast<double>(body.trees.size());
          return probabilistic(p, p);
        } else if constexpr (std::is_same_v<T, GbtModel>) {
          const double f = body.margin(x);
          return probabilistic(f, sigmoid(2.0 * f));
        } else {
          const double s = body.score(x);
          return probabilistic(s, sigmoid(s));
        }
      },
      model.body);
}

Prediction predict(const TrainedClassifier& model, const FeatureVector& features) {
  const auto dense = features.to_dense();
  return predict(model, std::span<const double>(dense));
}

namespace {

std::vector<double> ensemble_importances(const std::vector<DecisionTree>& trees, std::size_t d) {
  std::vector<double> total(d, 0.0);
  for (const auto& t : trees) {
    const auto imp = t.importances(d);
    for (std::size_t i = 0; i < d; ++i) total[i] += imp[i];
  }
  const double sum = std::accumulate(total.begin(), total.end(), 0.0);
  if (sum > 0.0)
    for (double& v : total) v /= sum;
  return total;
}

}  // namespace

std::vector<double> feature_importances(const TrainedClassifier& model) {
  const std::size_t d = model.num_features;
  if (const auto* t = std::get_if<TreeModel>(&model.body)) return t->tree.importances(d);
  if (const auto* f = std::get_if<ForestModel>(&model.body)) return ensemble_importances(f->trees, d);
  if (const auto* g = std::get_if<GbtModel>(&model.body)) return ensemble_importances(g->trees, d);
  throw std::invalid_argument("feature importances are only defined for dt, rf and gbt models, not " +
                              std::string(family_tag(model.family())));
}

bool valid_importances(std::span<const double> weights, double tol) {
  double sum = 0.0;
  bool any = false;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) return false;
    any = any || w > 0.0;
    sum += w;
  }
  return !any || std::abs(sum - 1.0) <= tol;
}

namespace {

json linear_to_json(const LinearModel& m) {
  return {{"weights", m.weights}, {"intercept", m.intercept}};
}

LinearModel linear_from_json(const json& j, std::size_t d) {
  LinearModel m{j.at("weights").get<std::vector<double>>(), j.at("intercept").get<double>()};
  if (m.weights.size() != d) throw FormatError("linear model: weight count mismatch");
  return m;
}

json trees_to_json(const std::vector<DecisionTree>& trees) {
  json a = json::array();
  for (const auto& t : trees) a.push_back(tree_to_json(t));
  return a;
}

std::vector<DecisionTree> trees_from_json(const json& j) {
  std::vector<DecisionTree> out;
  for (const auto& t : j) out.push_back(tree_from_json(t));
  return out;
}

}  // namespace

json model_to_json(const TrainedClassifier& model) {
  json body = std::visit(
      [](const auto& b) -> json {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, LogisticModel> || std::is_same_v<T, SvmModel>) {
          return linear_to_json(b.linear);
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          return {{"tree", tree_to_json(b.tree)}};
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          return {{"trees", trees_to_json(b.trees)}};
        } else if constexpr (std::is_same_v<T, GbtModel>) {
          return {{"f0", b.f0}, {"learning_rate", b.learning_rate}, {"trees", trees_to_json(b.trees)}};
        } else {
          return {{"w0", b.w0}, {"w", b.w}, {"v", b.v}, {"factor_size", b.factor_size}};
        }
      },
      model.body);
  return {{"params", params_to_json(model.params)}, {"num_features", model.num_features}, {"body", body}};
}

TrainedClassifier model_from_json(const json& j) {
  TrainedClassifier m;
  m.params = params_from_json(j.at("params"));
  m.num_features = j.at("num_features").get<std::size_t>();
  const json& b = j.at("body");
  const std::size_t d = m.num_features;
  auto check_tree = [d](const DecisionTree& t) {
    for (const auto& n : t.nodes)
      if (!n.is_leaf() && static_cast<std::size_t>(n.feature) >= d)
        throw FormatError("tree: split feature out of range");
  };
  switch (m.params.family) {
    case Family::LR: m.body = LogisticModel{linear_from_json(b, d)}; break;
    case Family::SVM: m.body = SvmModel{linear_from_json(b, d)}; break;
    case Family::DT: {
      TreeModel t{tree_from_json(b.at("tree"))};
      check_tree(t.tree);
      m.body = std::move(t);
      break;
    }
    case Family::RF: {
      ForestModel f{trees_from_json(b.at("trees"))};
      if (f.trees.empty()) throw FormatError("forest: no trees");
      for (const auto& t : f.trees) check_tree(t);
      m.body = std::move(f);
      break;
    }
    case Family::GBT: {
      GbtModel g{b.at("f0").get<double>(), b.at("learning_rate").get<double>(), trees_from_json(b.at("trees"))};
      for (const auto& t : g.trees) check_tree(t);
      m.body = std::move(g);
      break;
    }
    case Family::FM: {
      FmModel f{b.at("w0").get<double>(), b.at("w").get<std::vector<double>>(),
                b.at("v").get<std::vector<double>>(), b.at("factor_size").get<std::size_t>()};
      if (f.w.size() != d || f.v.size() != d * f.factor_size)
        throw FormatError("fm: parameter size mismatch");
      m.body = std::move(f);
      break;
    }
  }
  return m;
}

}  // namespace benefitml
