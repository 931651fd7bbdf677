#include <cmath>
#include <limits>
#include <stdexcept>

#include "benefitml/classifier.hpp"

namespace benefitml {

namespace {

double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

double norm2(const LinearModel& g) {
  double s = g.intercept * g.intercept;
  for (double v : g.weights) s += v * v;
  return s;
}

double reg_term(const LinearModel& m, double reg) {
  double s = 0.0;
  for (double v : m.weights) s += v * v;
  return 0.5 * reg * s;
}

// Divides each column by its sample standard deviation; constant columns get
// scale 0 and so never receive weight.
struct Standardizer {
  std::vector<double> scale;

  static Standardizer fit(const Dataset& data, bool enabled) {
    Standardizer s;
    s.scale.assign(data.cols, 1.0);
    if (!enabled) return s;
    for (std::size_t j = 0; j < data.cols; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < data.rows; ++i) mean += data.at(i, j);
      mean /= static_cast<double>(data.rows);
      double ss = 0.0;
      for (std::size_t i = 0; i < data.rows; ++i) {
        const double d = data.at(i, j) - mean;
        ss += d * d;
      }
      const double sd = data.rows > 1 ? std::sqrt(ss / static_cast<double>(data.rows - 1)) : 0.0;
      s.scale[j] = sd > 0.0 ? 1.0 / sd : 0.0;
    }
    return s;
  }

  Dataset apply(const Dataset& data) const {
    Dataset out = data;
    for (std::size_t i = 0; i < data.rows; ++i)
      for (std::size_t j = 0; j < data.cols; ++j) out.x[i * data.cols + j] *= scale[j];
    return out;
  }

  LinearModel to_original(LinearModel m) const {
    for (std::size_t j = 0; j < m.weights.size(); ++j) m.weights[j] *= scale[j];
    return m;
  }
};

void axpy(LinearModel& m, double a, const LinearModel& g) {
  m.intercept += a * g.intercept;
  for (std::size_t j = 0; j < m.weights.size(); ++j) m.weights[j] += a * g.weights[j];
}

}  // namespace

namespace logistic {

double objective(const LinearModel& m, const Dataset& data, double reg) {
  double loss = 0.0;
  for (std::size_t i = 0; i < data.rows; ++i) {
    const double y = data.y[i] == 1 ? 1.0 : -1.0;
    loss += softplus(-y * m.margin(data.row(i)));
  }
  return loss / static_cast<double>(data.rows) + reg_term(m, reg);
}

LinearModel gradient(const LinearModel& m, const Dataset& data, double reg) {
  LinearModel g{std::vector<double>(data.cols, 0.0), 0.0};
  for (std::size_t i = 0; i < data.rows; ++i) {
    const auto x = data.row(i);
    const double r = sigmoid(m.margin(x)) - static_cast<double>(data.y[i]);
    g.intercept += r;
    for (std::size_t j = 0; j < data.cols; ++j) g.weights[j] += r * x[j];
  }
  const double inv = 1.0 / static_cast<double>(data.rows);
  g.intercept *= inv;
  for (std::size_t j = 0; j < data.cols; ++j) g.weights[j] = g.weights[j] * inv + reg * m.weights[j];
  return g;
}

// Full-batch gradient descent with Armijo backtracking; the objective never
// increases between accepted iterates.
TrainedClassifier train(const Dataset& raw, const ClassifierParams& params) {
  const Standardizer std_ = Standardizer::fit(raw, params.standardization);
  const Dataset data = params.standardization ? std_.apply(raw) : raw;
  const double reg = params.reg_param;

  LinearModel m{std::vector<double>(data.cols, 0.0), 0.0};
  double f = objective(m, data, reg);
  double step = 1.0;
  for (int it = 0; it < params.max_iter; ++it) {
    LinearModel g = gradient(m, data, reg);
    if (!params.fit_intercept) g.intercept = 0.0;
    const double gg = norm2(g);
    if (std::sqrt(gg) < params.tol) break;
    bool accepted = false;
    double alpha = step;
    for (int halvings = 0; halvings < 60; ++halvings, alpha *= 0.5) {
      LinearModel cand = m;
      axpy(cand, -alpha, g);
      const double fc = objective(cand, data, reg);
      if (fc <= f - 1e-4 * alpha * gg) {
        m = std::move(cand);
        f = fc;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    step = alpha * 2.0;
  }
  return TrainedClassifier{params, raw.cols, LogisticModel{std_.to_original(std::move(m))}};
}

}  // namespace logistic

namespace svm {

double objective(const LinearModel& m, const Dataset& data, double reg) {
  double loss = 0.0;
  for (std::size_t i = 0; i < data.rows; ++i) {
    const double y = data.y[i] == 1 ? 1.0 : -1.0;
    loss += std::max(0.0, 1.0 - y * m.margin(data.row(i)));
  }
  return loss / static_cast<double>(data.rows) + reg_term(m, reg);
}

LinearModel subgradient(const LinearModel& m, const Dataset& data, double reg) {
  LinearModel g{std::vector<double>(data.cols, 0.0), 0.0};
  for (std::size_t i = 0; i < data.rows; ++i) {
    const auto x = data.row(i);
    const double y = data.y[i] == 1 ? 1.0 : -1.0;
    if (y * m.margin(x) >= 1.0) continue;
    g.intercept -= y;
    for (std::size_t j = 0; j < data.cols; ++j) g.weights[j] -= y * x[j];
  }
  const double inv = 1.0 / static_cast<double>(data.rows);
  g.intercept *= inv;
  for (std::size_t j = 0; j < data.cols; ++j) g.weights[j] = g.weights[j] * inv + reg * m.weights[j];
  return g;
}

// Deterministic subgradient descent from zero with step 1 / (regParam * t)
// when regularized, otherwise the fixed stepSize. Subgradient steps do not
// always descend, so the iterate with the lowest objective is returned.
TrainedClassifier train(const Dataset& raw, const ClassifierParams& params) {
  const Standardizer std_ = Standardizer::fit(raw, params.standardization);
  const Dataset data = params.standardization ? std_.apply(raw) : raw;
  const double reg = params.reg_param;

  LinearModel m{std::vector<double>(data.cols, 0.0), 0.0};
  LinearModel best = m;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= params.max_iter; ++t) {
    LinearModel g = subgradient(m, data, reg);
    if (!params.fit_intercept) g.intercept = 0.0;
    if (std::sqrt(norm2(g)) < params.tol) break;
    const double eta = reg > 0.0 ? 1.0 / (reg * t) : params.step_size;
    axpy(m, -eta, g);
    const double obj = objective(m, data, reg);
    if (obj < best_obj) {
      best_obj = obj;
      best = m;
    }
  }
  return TrainedClassifier{params, raw.cols, SvmModel{std_.to_original(std::move(best))}};
}

}  // namespace svm

}  // namespace benefitml
