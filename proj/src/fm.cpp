#include <cmath>
#include <numeric>

#include "benefitml/classifier.hpp"
#include "benefitml/rng.hpp"

namespace benefitml::fm {

namespace {

double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

std::vector<std::size_t> all_rows(const Dataset& data, std::span<const std::size_t> rows) {
  if (!rows.empty()) return {rows.begin(), rows.end()};
  std::vector<std::size_t> out(data.rows);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

FmModel zeros_like(const FmModel& m) {
  return FmModel{0.0, std::vector<double>(m.w.size(), 0.0), std::vector<double>(m.v.size(), 0.0),
                 m.factor_size};
}

}  // namespace

double objective(const FmModel& m, const Dataset& data, double reg, std::span<const std::size_t> rows) {
  const auto idx = all_rows(data, rows);
  double loss = 0.0;
  for (std::size_t i : idx) {
    const double y = data.y[i] == 1 ? 1.0 : -1.0;
    loss += softplus(-y * m.score(data.row(i)));
  }
  double sq = 0.0;
  for (double v : m.w) sq += v * v;
  for (double v : m.v) sq += v * v;
  return loss / static_cast<double>(idx.size()) + 0.5 * reg * sq;
}

FmModel gradient(const FmModel& m, const Dataset& data, double reg, std::span<const std::size_t> rows) {
  const auto idx = all_rows(data, rows);
  const std::size_t d = m.w.size(), k = m.factor_size;
  FmModel g = zeros_like(m);
  std::vector<double> s(k);
  for (std::size_t i : idx) {
    const auto x = data.row(i);
    const double r = sigmoid(m.score(x)) - static_cast<double>(data.y[i]);
    g.w0 += r;
    for (std::size_t f = 0; f < k; ++f) {
      s[f] = 0.0;
      for (std::size_t j = 0; j < d; ++j) s[f] += m.v[j * k + f] * x[j];
    }
    for (std::size_t j = 0; j < d; ++j) {
      if (x[j] == 0.0) continue;
      g.w[j] += r * x[j];
      for (std::size_t f = 0; f < k; ++f)
        g.v[j * k + f] += r * (x[j] * s[f] - m.v[j * k + f] * x[j] * x[j]);
    }
  }
  const double inv = 1.0 / static_cast<double>(idx.size());
  g.w0 *= inv;
  for (std::size_t j = 0; j < d; ++j) g.w[j] = g.w[j] * inv + reg * m.w[j];
  for (std::size_t q = 0; q < g.v.size(); ++q) g.v[q] = g.v[q] * inv + reg * m.v[q];
  return g;
}

// Seeded mini-batch gradient descent: each iteration is one pass over a
// fresh permutation of the rows.
TrainedClassifier train(const Dataset& data, const ClassifierParams& params) {
  const std::size_t d = data.cols, k = static_cast<std::size_t>(params.factor_size);
  Rng rng(params.seed);
  FmModel m{0.0, std::vector<double>(d, 0.0), std::vector<double>(d * k, 0.0), k};
  if (params.init_std > 0.0)
    for (double& v : m.v) v = rng.normal(0.0, params.init_std);

  const std::size_t batch = static_cast<std::size_t>(params.mini_batch_size);
  const double step = params.step_size;
  for (int epoch = 0; epoch < params.max_iter; ++epoch) {
    const auto perm = rng.permutation(data.rows);
    for (std::size_t start = 0; start < perm.size(); start += batch) {
      const std::size_t end = std::min(perm.size(), start + batch);
      const auto rows = std::span<const std::size_t>(perm).subspan(start, end - start);
      const FmModel g = gradient(m, data, params.reg_param, rows);
      if (params.fit_intercept) m.w0 -= step * g.w0;
      if (params.fit_linear)
        for (std::size_t j = 0; j < d; ++j) m.w[j] -= step * g.w[j];
      for (std::size_t q = 0; q < m.v.size(); ++q) m.v[q] -= step * g.v[q];
    }
  }
  return TrainedClassifier{params, d, std::move(m)};
}

}  // namespace benefitml::fm
