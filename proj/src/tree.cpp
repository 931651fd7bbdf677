#include "benefitml/tree.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

#include "benefitml/error.hpp"

namespace benefitml {

using nlohmann::json;

const TreeNode& DecisionTree::leaf_for(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes.at(i).is_leaf()) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i];
}

int DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> level(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes[i].is_leaf()) {
      level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

std::vector<double> DecisionTree::importances(std::size_t num_features) const {
  std::vector<double> imp(num_features, 0.0);
  for (const auto& n : nodes) {
    if (!n.is_leaf()) imp.at(static_cast<std::size_t>(n.feature)) += n.weight * n.impurity_decrease;
  }
  const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
  if (total > 0.0)
    for (double& v : imp) v /= total;
  return imp;
}

namespace {

using u128 = unsigned __int128;

double midpoint(double a, double b) {
  const double m = 0.5 * (a + b);
  return (m >= a && m < b) ? m : a;
}

// Gini criterion on integer-weighted rows. Candidate quality is
// (L0^2 + L1^2) / nL + (R0^2 + R1^2) / nR, compared exactly as a fraction so
// tie-breaking never depends on rounding.
struct GiniCriterion {
  const Dataset& data;
  std::span<const std::uint32_t> weight;

  struct Stats {
    std::uint64_t c0 = 0;
    std::uint64_t c1 = 0;
    std::uint64_t total() const { return c0 + c1; }
  };
  struct Candidate {
    std::size_t feature = 0;
    double threshold = 0.0;
    u128 num = 0;
    std::uint64_t den = 1;
    std::uint64_t l0 = 0, l1 = 0, r0 = 0, r1 = 0;
  };

  std::uint64_t w(std::uint32_t row) const { return weight.empty() ? 1 : weight[row]; }

  Stats stats(std::span<const std::uint32_t> rows) const {
    Stats s;
    for (auto r : rows) (data.y[r] == 1 ? s.c1 : s.c0) += w(r);
    return s;
  }
  bool pure(const Stats& s) const { return s.c0 == 0 || s.c1 == 0; }
  double weight_of(const Stats& s) const { return static_cast<double>(s.total()); }

  void fill(TreeNode& node, const Stats& s) const {
    node.weight = static_cast<double>(s.total());
    node.count0 = static_cast<double>(s.c0);
    node.count1 = static_cast<double>(s.c1);
    node.value = s.total() ? static_cast<double>(s.c1) / static_cast<double>(s.total()) : 0.0;
  }

  static bool better(const Candidate& a, const Candidate& b) {
    // a.num / a.den > b.num / b.den
    return a.num * b.den > b.num * a.den;
  }

  void scan(std::size_t f, std::span<const std::uint32_t> rows, const Stats& s,
            std::optional<Candidate>& best) const {
    std::uint64_t l0 = 0, l1 = 0;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      const auto r = rows[i];
      (data.y[r] == 1 ? l1 : l0) += w(r);
      const double a = data.at(r, f);
      const double b = data.at(rows[i + 1], f);
      if (!(a < b)) continue;
      const std::uint64_t r0 = s.c0 - l0, r1 = s.c1 - l1;
      const std::uint64_t nl = l0 + l1, nr = r0 + r1;
      Candidate c;
      c.feature = f;
      c.threshold = midpoint(a, b);
      c.num = (u128(l0) * l0 + u128(l1) * l1) * nr + (u128(r0) * r0 + u128(r1) * r1) * nl;
      c.den = nl * nr;
      c.l0 = l0;
      c.l1 = l1;
      c.r0 = r0;
      c.r1 = r1;
      if (!best || better(c, *best)) best = c;
    }
  }

  static double gini(std::uint64_t a, std::uint64_t b) {
    const double n = static_cast<double>(a + b);
    if (n == 0.0) return 0.0;
    const double pa = static_cast<double>(a) / n, pb = static_cast<double>(b) / n;
    return 1.0 - pa * pa - pb * pb;
  }

  double gain(const Candidate& c, const Stats& s) const {
    const double n = static_cast<double>(s.total());
    const double nl = static_cast<double>(c.l0 + c.l1), nr = static_cast<double>(c.r0 + c.r1);
    const double g = gini(s.c0, s.c1) - nl / n * gini(c.l0, c.l1) - nr / n * gini(c.r0, c.r1);
    return std::max(0.0, g);
  }

  // Zero-gain splits are allowed: an impure node with any usable threshold splits.
  bool accept(const Candidate&, const Stats&) const { return true; }
};

// Squared-error criterion; quality is SL^2 / nL + SR^2 / nR.
struct VarianceCriterion {
  const Dataset& data;
  std::span<const double> target;

  struct Stats {
    double n = 0.0;
    double sum = 0.0;
    double lo = 0.0;
    double hi = 0.0;
  };
  struct Candidate {
    std::size_t feature = 0;
    double threshold = 0.0;
    double score = 0.0;
  };

  Stats stats(std::span<const std::uint32_t> rows) const {
    Stats s;
    bool first = true;
    for (auto r : rows) {
      const double t = target[r];
      s.n += 1.0;
      s.sum += t;
      s.lo = first ? t : std::min(s.lo, t);
      s.hi = first ? t : std::max(s.hi, t);
      first = false;
    }
    return s;
  }
  bool pure(const Stats& s) const { return s.lo == s.hi; }
  double weight_of(const Stats& s) const { return s.n; }

  void fill(TreeNode& node, const Stats& s) const {
    node.weight = s.n;
    node.value = s.n > 0.0 ? s.sum / s.n : 0.0;
  }

  static bool better(const Candidate& a, const Candidate& b) { return a.score > b.score; }

  void scan(std::size_t f, std::span<const std::uint32_t> rows, const Stats& s,
            std::optional<Candidate>& best) const {
    double sl = 0.0, nl = 0.0;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      const auto r = rows[i];
      sl += target[r];
      nl += 1.0;
      const double a = data.at(r, f);
      const double b = data.at(rows[i + 1], f);
      if (!(a < b)) continue;
      const double sr = s.sum - sl, nr = s.n - nl;
      Candidate c{f, midpoint(a, b), sl * sl / nl + sr * sr / nr};
      if (!best || better(c, *best)) best = c;
    }
  }

  double gain(const Candidate& c, const Stats& s) const {
    return std::max(0.0, (c.score - s.sum * s.sum / s.n) / s.n);
  }

  bool accept(const Candidate& c, const Stats& s) const { return gain(c, s) > 0.0; }
};

template <typename Criterion>
class TreeGrower {
 public:
  TreeGrower(const Dataset& data, Criterion crit, const TreeConfig& config, Rng* rng,
             std::vector<std::uint32_t> rows)
      : data_(data), crit_(std::move(crit)), config_(config), rng_(rng) {
    if (config.max_depth < 0) throw std::invalid_argument("maxDepth must be >= 0");
    lists_.assign(data.cols + 1, rows);
    for (std::size_t f = 0; f < data.cols; ++f) {
      auto& l = lists_[f];
      std::stable_sort(l.begin(), l.end(),
                       [&](std::uint32_t a, std::uint32_t b) { return data.at(a, f) < data.at(b, f); });
    }
    goes_left_.assign(data.rows, 0);
    scratch_.resize(rows.size());
  }

  DecisionTree grow() {
    const std::size_t n = lists_.back().size();
    if (n == 0) throw DataError("cannot grow a tree on zero rows");
    grow_node(0, n, 0);
    return std::move(tree_);
  }

 private:
  std::vector<std::size_t> candidate_features() {
    const std::size_t d = data_.cols;
    std::vector<std::size_t> feats(d);
    std::iota(feats.begin(), feats.end(), std::size_t{0});
    const std::size_t m = config_.features_per_split;
    if (m == 0 || m >= d || rng_ == nullptr) return feats;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng_->below(d - i));
      std::swap(feats[i], feats[j]);
    }
    feats.resize(m);
    std::sort(feats.begin(), feats.end());
    return feats;
  }

  int grow_node(std::size_t begin, std::size_t end, int depth) {
    const auto members = std::span<const std::uint32_t>(lists_.back()).subspan(begin, end - begin);
    const auto stats = crit_.stats(members);
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    crit_.fill(tree_.nodes.back(), stats);

    if (depth >= config_.max_depth || crit_.pure(stats) ||
        crit_.weight_of(stats) < static_cast<double>(config_.min_instances_per_node))
      return index;

    std::optional<typename Criterion::Candidate> best;
    for (std::size_t f : candidate_features()) {
      const auto rows = std::span<const std::uint32_t>(lists_[f]).subspan(begin, end - begin);
      crit_.scan(f, rows, stats, best);
    }
    if (!best || !crit_.accept(*best, stats)) return index;

    const std::size_t f = best->feature;
    const double thr = best->threshold;
    std::size_t n_left = 0;
    for (auto r : members) {
      goes_left_[r] = data_.at(r, f) <= thr;
      n_left += goes_left_[r];
    }
    for (auto& list : lists_) partition(list, begin, end);

    {
      TreeNode& node = tree_.nodes[static_cast<std::size_t>(index)];
      node.feature = static_cast<int>(f);
      node.threshold = thr;
      node.impurity_decrease = crit_.gain(*best, stats);
    }
    const int left = grow_node(begin, begin + n_left, depth + 1);
    const int right = grow_node(begin + n_left, end, depth + 1);
    tree_.nodes[static_cast<std::size_t>(index)].left = left;
    tree_.nodes[static_cast<std::size_t>(index)].right = right;
    return index;
  }

  // Stable partition of list[begin, end) by goes_left_, preserving sort order.
  void partition(std::vector<std::uint32_t>& list, std::size_t begin, std::size_t end) {
    std::size_t l = begin, k = 0;
    for (std::size_t i = begin; i < end; ++i) {
      if (goes_left_[list[i]])
        list[l++] = list[i];
      else
        scratch_[k++] = list[i];
    }
    std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(k),
              list.begin() + static_cast<std::ptrdiff_t>(l));
  }

  const Dataset& data_;
  Criterion crit_;
  TreeConfig config_;
  Rng* rng_;
  std::vector<std::vector<std::uint32_t>> lists_;  // one sorted list per feature, then membership
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::uint32_t> scratch_;
  DecisionTree tree_;
};

}  // namespace

DecisionTree build_classification_tree(const Dataset& data, std::span<const std::uint32_t> multiplicity,
                                       const TreeConfig& config, Rng* rng) {
  if (!multiplicity.empty() && multiplicity.size() != data.rows)
    throw DataError("tree: multiplicity length != row count");
  std::vector<std::uint32_t> rows;
  rows.reserve(data.rows);
  for (std::size_t i = 0; i < data.rows; ++i)
    if (multiplicity.empty() || multiplicity[i] > 0) rows.push_back(static_cast<std::uint32_t>(i));
  TreeGrower<GiniCriterion> grower(data, GiniCriterion{data, multiplicity}, config, rng, std::move(rows));
  return grower.grow();
}

DecisionTree build_regression_tree(const Dataset& data, std::span<const double> targets,
                                   const TreeConfig& config) {
  if (targets.size() != data.rows) throw DataError("tree: target length != row count");
  std::vector<std::uint32_t> rows(data.rows);
  std::iota(rows.begin(), rows.end(), 0u);
  TreeGrower<VarianceCriterion> grower(data, VarianceCriterion{data, targets}, config, nullptr,
                                       std::move(rows));
  return grower.grow();
}

json tree_to_json(const DecisionTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) {
    nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.impurity_decrease,
                                 n.weight, n.value, n.count0, n.count1}));
  }
  return nodes;
}

DecisionTree tree_from_json(const json& j) {
  DecisionTree t;
  for (const auto& a : j) {
    TreeNode n;
    n.feature = a.at(0).get<int>();
    n.threshold = a.at(1).get<double>();
    n.left = a.at(2).get<int>();
    n.right = a.at(3).get<int>();
    n.impurity_decrease = a.at(4).get<double>();
    n.weight = a.at(5).get<double>();
    n.value = a.at(6).get<double>();
    n.count0 = a.at(7).get<double>();
    n.count1 = a.at(8).get<double>();
    t.nodes.push_back(n);
  }
  const int count = static_cast<int>(t.nodes.size());
  for (int i = 0; i < count; ++i) {
    const TreeNode& n = t.nodes[static_cast<std::size_t>(i)];
    // Children always follow their parent, which also rules out cycles.
    if (!n.is_leaf() && (n.left <= i || n.right <= i || n.left >= count || n.right >= count))
      throw FormatError("tree: child index out of range");
  }
  if (t.nodes.empty()) throw FormatError("tree: no nodes");
  return t;
}

}  // namespace benefitml
