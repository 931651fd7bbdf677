#pragma once

// Straightforward reference implementations used to cross-check the engine.
// They favour obviousness over speed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace oracle {

// P(score+ > score-) + 1/2 P(tie) over every positive/negative pair.
inline double concordance_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0;
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// Average precision with every distinct score as a threshold.
inline double average_precision(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::map<double, std::pair<int, int>, std::greater<>> groups;  // score -> (pos, neg)
  int positives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    auto& g = groups[scores[i]];
    if (labels[i] == 1) {
      ++g.first;
      ++positives;
    } else {
      ++g.second;
    }
  }
  double ap = 0.0;
  int tp = 0, fp = 0;
  for (const auto& [s, g] : groups) {
    tp += g.first;
    fp += g.second;
    ap += static_cast<double>(g.first) / positives * tp / (tp + fp);
  }
  return ap;
}

// Exhaustive CART over a tiny dataset with unit weights: at each node try
// every feature and every midpoint, keep the split with the largest
// (L0^2 + L1^2)/nL + (R0^2 + R1^2)/nR, first (lowest feature, then lowest
// threshold) on ties. Leaves: pure nodes, depth limit, or no split point.
struct Node {
  int feature = -1;
  double threshold = 0.0;
  double value = 0.0;  // share of positives
  std::unique_ptr<Node> left, right;
};

inline std::unique_ptr<Node> exhaustive_tree(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                                             const std::vector<std::size_t>& rows, int depth, int max_depth) {
  auto node = std::make_unique<Node>();
  long long c1 = 0;
  for (auto r : rows) c1 += y[r];
  const long long n = static_cast<long long>(rows.size());
  node->value = static_cast<double>(c1) / static_cast<double>(n);
  if (depth >= max_depth || c1 == 0 || c1 == n) return node;

  bool found = false;
  long long best_num = 0, best_den = 1;
  int best_f = -1;
  double best_t = 0.0;
  const std::size_t d = x[rows[0]].size();
  for (std::size_t f = 0; f < d; ++f) {
    std::vector<double> values;
    for (auto r : rows) values.push_back(x[r][f]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      const double t = values[k] + (values[k + 1] - values[k]) / 2.0;
      long long l0 = 0, l1 = 0, r0 = 0, r1 = 0;
      for (auto r : rows) {
        if (x[r][f] <= t) (y[r] ? l1 : l0)++;
        else (y[r] ? r1 : r0)++;
      }
      const long long nl = l0 + l1, nr = r0 + r1;
      const long long num = (l0 * l0 + l1 * l1) * nr + (r0 * r0 + r1 * r1) * nl;
      const long long den = nl * nr;
      if (!found || num * best_den > best_num * den) {
        found = true;
        best_num = num;
        best_den = den;
        best_f = static_cast<int>(f);
        best_t = t;
      }
    }
  }
  if (!found) return node;
  node->feature = best_f;
  node->threshold = best_t;
  std::vector<std::size_t> lrows, rrows;
  for (auto r : rows) (x[r][static_cast<std::size_t>(best_f)] <= best_t ? lrows : rrows).push_back(r);
  node->left = exhaustive_tree(x, y, lrows, depth + 1, max_depth);
  node->right = exhaustive_tree(x, y, rrows, depth + 1, max_depth);
  return node;
}

// w0 + sum_i w_i x_i + sum_{i<j} <v_i, v_j> x_i x_j
inline double fm_pairwise(double w0, const std::vector<double>& w, const std::vector<double>& v, std::size_t k,
                          const std::vector<double>& x) {
  double s = w0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * x[i];
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      double dot = 0.0;
      for (std::size_t f = 0; f < k; ++f) dot += v[i * k + f] * v[j * k + f];
      s += dot * x[i] * x[j];
    }
  return s;
}

// Central differences of f at p, one coordinate at a time.
inline std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                            std::vector<double> p, double h = 1e-6) {
  std::vector<double> g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + h;
    const double up = f(p);
    p[i] = keep - h;
    const double down = f(p);
    p[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale == 0.0 ? std::sqrt(diff) : std::sqrt(diff) / scale;
}

}  // namespace oracle
