#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>

#include "benefitml/classifier.hpp"
#include "benefitml/error.hpp"
#include "benefitml/table_io.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace benefitml;

namespace {

Dataset xor4() { return Dataset::from_rows({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 1, 0}); }

double train_accuracy(const TrainedClassifier& m, const Dataset& d) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < d.rows; ++i) hit += predict(m, d.row(i)).label == d.y[i];
  return static_cast<double>(hit) / static_cast<double>(d.rows);
}

Dataset separable(std::size_t n) {
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) - static_cast<double>(n) / 2.0 + 0.5;
    rows.push_back({x, static_cast<double>(i % 3)});
    y.push_back(x > 0 ? 1 : 0);
  }
  return Dataset::from_rows(rows, y);
}

Dataset benefits_data(std::size_t rows, std::uint64_t seed) {
  const auto t = fixtures::benefits(rows, seed);
  const auto out = pipeline_fit(default_benefits_pipeline(), t).transform(t);
  return dataset_from_table(out, "features", "label");
}

ClassifierParams with(Family f, auto&&... edits) {
  auto p = ClassifierParams::defaults(f);
  (edits(p), ...);
  return p;
}

std::filesystem::path golden_path() { return std::filesystem::path(BENEFITML_SOURCE_DIR) / "tests/golden/predictions.json"; }

}  // namespace

TEST_CASE("params: declared defaults and validation") {
  const auto lr = ClassifierParams::defaults(Family::LR);
  CHECK(lr.max_iter == 10);
  CHECK(lr.reg_param == 0.1);
  CHECK(lr.threshold == 0.5);
  CHECK(ClassifierParams::defaults(Family::DT).max_depth == 5);
  CHECK(ClassifierParams::defaults(Family::RF).num_trees == 100);
  const auto gbt = ClassifierParams::defaults(Family::GBT);
  CHECK(gbt.max_iter == 20);
  CHECK(gbt.step_size == 0.1);
  const auto fm = ClassifierParams::defaults(Family::FM);
  CHECK(fm.factor_size == 8);
  CHECK(fm.init_std == 0.01);
  CHECK(fm.seed == 1);

  CHECK_THROWS(with(Family::LR, [](auto& p) { p.threshold = 1.0; }).validate());
  CHECK_THROWS(with(Family::LR, [](auto& p) { p.reg_param = -1; }).validate());
  CHECK_THROWS(with(Family::DT, [](auto& p) { p.max_depth = 0; }).validate());
  CHECK_THROWS(with(Family::GBT, [](auto& p) { p.max_iter = 0; }).validate());
  CHECK_THROWS(family_from_tag("knn"));
  CHECK(params_from_json(params_to_json(fm)) == fm);
}

TEST_CASE("logistic: zero model gives one half and predicts 0") {
  TrainedClassifier m{ClassifierParams::defaults(Family::LR), 3, LogisticModel{{{0, 0, 0}, 0}}};
  const auto p = predict(m, std::vector<double>{1.5, -2, 9});
  CHECK(*p.probability == 0.5);
  CHECK(p.label == 0);
}

TEST_CASE("logistic: single class predicts 1") {
  const auto d = Dataset::from_rows({{0.1}, {0.7}, {-3}}, {1, 1, 1});
  const auto m = train(d, ClassifierParams::defaults(Family::LR));
  for (double x : {-10.0, 0.0, 10.0}) {
    const auto p = predict(m, std::vector<double>{x});
    CHECK(*p.probability >= 0.5);
    CHECK(p.label == 1);
  }
}

TEST_CASE("logistic: two-point problem beats ln 2 and agrees with grid search") {
  const auto d = Dataset::from_rows({{-1}, {1}}, {0, 1});
  auto params = ClassifierParams::defaults(Family::LR);
  params.standardization = false;
  const auto m = train(d, params);
  const auto& lin = std::get<LogisticModel>(m.body).linear;
  CHECK(lin.weights[0] > 0);
  const double obj = logistic::objective(lin, d, 0.1);
  CHECK(obj < std::log(2.0));

  // oracle: coarse grid over (w, b); the optimum has positive w
  double best = INFINITY, best_w = 0;
  for (double w = -5; w <= 5; w += 0.01)
    for (double b = -1; b <= 1; b += 0.05) {
      const double o = logistic::objective({{w}, b}, d, 0.1);
      if (o < best) best = o, best_w = w;
    }
  CHECK(best_w > 0);
  CHECK(obj >= best - 1e-6);
}

TEST_CASE("logistic: analytic gradient matches finite differences") {
  const auto d = benefits_data(200, 3);
  Rng rng(2);
  LinearModel m{std::vector<double>(d.cols), 0.3};
  for (auto& w : m.weights) w = rng.normal(0, 0.5);
  const auto g = logistic::gradient(m, d, 0.1);
  std::vector<double> params = m.weights;
  params.push_back(m.intercept);
  const auto num = oracle::numeric_gradient(
      [&](const std::vector<double>& p) { return logistic::objective({{p.begin(), p.end() - 1}, p.back()}, d, 0.1); },
      params);
  std::vector<double> ana = g.weights;
  ana.push_back(g.intercept);
  CHECK(oracle::relative_error(ana, num) < 1e-5);
}

TEST_CASE("threshold monotonicity for logistic regression") {
  const auto d = benefits_data(500, 4);
  auto lo = ClassifierParams::defaults(Family::LR);
  const auto base = train(d, lo);
  for (double t : {0.3, 0.5, 0.7, 0.9}) {
    auto tighter = base;
    tighter.params.threshold = t + 0.05;
    auto looser = base;
    looser.params.threshold = t;
    for (std::size_t i = 0; i < d.rows; ++i)
      CHECK(predict(tighter, d.row(i)).label <= predict(looser, d.row(i)).label);
  }
}

TEST_CASE("decision tree: one separating feature gives a stump") {
  const auto d = Dataset::from_rows({{3, 1}, {3, 2}, {3, 8}, {3, 9}}, {0, 0, 1, 1});
  const auto m = train(d, ClassifierParams::defaults(Family::DT));
  const auto& tree = std::get<TreeModel>(m.body).tree;
  CHECK(tree.depth() == 1);
  CHECK(train_accuracy(m, d) == 1.0);
  const auto imp = feature_importances(m);
  CHECK(imp == std::vector<double>{0.0, 1.0});
}

TEST_CASE("decision tree: XOR against exhaustive search") {
  const auto d = xor4();
  const std::vector<std::vector<double>> x{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  for (int depth : {1, 2}) {
    const auto m = train(d, with(Family::DT, [&](auto& p) { p.max_depth = depth; }));
    const auto ref = oracle::exhaustive_tree(x, d.y, {0, 1, 2, 3}, 0, depth);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      const oracle::Node* n = ref.get();
      while (n->feature >= 0) n = x[i][static_cast<std::size_t>(n->feature)] <= n->threshold ? n->left.get() : n->right.get();
      hit += (n->value > 0.5 ? 1 : 0) == d.y[i];
    }
    CHECK(train_accuracy(m, d) == static_cast<double>(hit) / 4.0);
  }
  CHECK(train_accuracy(train(d, with(Family::DT, [](auto& p) { p.max_depth = 1; })), d) == 0.5);
  CHECK(train_accuracy(train(d, with(Family::DT, [](auto& p) { p.max_depth = 2; })), d) == 1.0);
}

TEST_CASE("decision tree: structural invariants") {
  const auto d = benefits_data(1500, 5);
  const auto m = train(d, ClassifierParams::defaults(Family::DT));
  const auto& tree = std::get<TreeModel>(m.body).tree;
  CHECK(tree.depth() <= 5);
  for (const auto& n : tree.nodes) {
    CHECK((n.value >= 0.0 && n.value <= 1.0));
    if (!n.is_leaf()) CHECK((n.left > 0 && n.right > 0));
  }
}

TEST_CASE("decision tree: single split on feature 3") {
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (int i = 0; i < 8; ++i) {
    rows.push_back({1, 2, 0, static_cast<double>(i), 5});
    y.push_back(i >= 4);
  }
  const auto imp = feature_importances(train(Dataset::from_rows(rows, y), ClassifierParams::defaults(Family::DT)));
  CHECK(imp == std::vector<double>{0, 0, 0, 1, 0});
}

TEST_CASE("random forest: separable data and determinism across threads") {
  const auto d = separable(200);
  const auto p = with(Family::RF, [](auto& q) { q.num_trees = 25; });
  const auto m = train(d, p, 1);
  CHECK(train_accuracy(m, d) >= 0.95);
  const auto text = model_to_json(m).dump();
  CHECK(model_to_json(train(d, p, 4)).dump() == text);
  CHECK(model_to_json(train(d, p, 1)).dump() == text);
  auto other = p;
  other.seed = 2;
  CHECK(model_to_json(train(d, other, 1)).dump() != text);
}

TEST_CASE("random forest: one full tree without bootstrap equals the decision tree") {
  const auto d = benefits_data(800, 6);
  const auto rf = train(d, with(Family::RF, [](auto& p) {
    p.num_trees = 1;
    p.feature_subset = FeatureSubset::all;
    p.bootstrap = false;
  }));
  const auto dt = train(d, ClassifierParams::defaults(Family::DT));
  for (std::size_t i = 0; i < d.rows; ++i) CHECK(predict(rf, d.row(i)) == predict(dt, d.row(i)));
}

TEST_CASE("gbt: degenerate inputs") {
  // identical vectors: no split, score stays at F0
  const auto same = Dataset::from_rows({{1, 1}, {1, 1}, {1, 1}, {1, 1}}, {1, 1, 1, 0});
  const auto m = train(same, ClassifierParams::defaults(Family::GBT));
  CHECK(*predict(m, same.row(0)).probability == doctest::Approx(0.75).epsilon(1e-12));

  CHECK_THROWS(train(Dataset::from_rows({{1}, {2}}, {1, 1}), ClassifierParams::defaults(Family::GBT)));

  const auto d = benefits_data(600, 2);
  const double rate = static_cast<double>(d.positives()) / static_cast<double>(d.rows);
  const auto frozen = train(d, with(Family::GBT, [](auto& p) { p.step_size = 0.0; }));
  for (std::size_t i = 0; i < d.rows; i += 37)
    CHECK(*predict(frozen, d.row(i)).probability == doctest::Approx(rate).epsilon(1e-12));
}

TEST_CASE("gbt: separable data in ten rounds and monotone loss") {
  const auto d = separable(60);
  const auto m = train(d, with(Family::GBT, [](auto& p) { p.max_iter = 10; }));
  CHECK(train_accuracy(m, d) == 1.0);

  const auto b = benefits_data(1000, 8);
  const auto g = train(b, ClassifierParams::defaults(Family::GBT));
  const auto loss = gbt::training_loss_curve(std::get<GbtModel>(g.body), b);
  REQUIRE(loss.size() == 21);
  for (std::size_t i = 1; i < loss.size(); ++i) CHECK(loss[i] <= loss[i - 1] + 1e-12);
}

TEST_CASE("fm: pairwise identity against direct sum") {
  FmModel m{0.0, {0.0, 0.0}, {1.0, 1.0}, 1};
  CHECK(m.score(std::vector<double>{1, 1}) == 1.0);

  Rng rng(9);
  const std::size_t n = 6, k = 3;
  FmModel r{rng.normal(), std::vector<double>(n), std::vector<double>(n * k), k};
  for (auto& w : r.w) w = rng.normal();
  for (auto& v : r.v) v = rng.normal();
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(n);
    for (auto& xi : x) xi = rng.bernoulli(0.5) ? rng.normal() : 0.0;
    CHECK(r.score(x) == doctest::Approx(oracle::fm_pairwise(r.w0, r.w, r.v, k, x)).epsilon(1e-12));
  }
}

TEST_CASE("fm: zero init keeps factors at zero and scores linearly") {
  const auto d = benefits_data(400, 3);
  const auto m = train(d, with(Family::FM, [](auto& p) { p.init_std = 0.0; }));
  const auto& fm = std::get<FmModel>(m.body);
  for (double v : fm.v) CHECK(v == 0.0);
  for (std::size_t i = 0; i < d.rows; i += 11) {
    const auto x = d.row(i);
    const double linear = fm.w0 + std::inner_product(x.begin(), x.end(), fm.w.begin(), 0.0);
    CHECK(fm.score(x) == doctest::Approx(linear).epsilon(1e-12));
  }
}

TEST_CASE("fm: seeded training is reproducible") {
  const auto d = benefits_data(400, 3);
  const auto p = ClassifierParams::defaults(Family::FM);
  CHECK(model_to_json(train(d, p)).dump() == model_to_json(train(d, p)).dump());
  auto other = p;
  other.seed = 5;
  CHECK(model_to_json(train(d, other)).dump() != model_to_json(train(d, p)).dump());
}

TEST_CASE("svm: zero margin, separable points, all-positive labels") {
  TrainedClassifier zero{ClassifierParams::defaults(Family::SVM), 1, SvmModel{{{0}, 0}}};
  const auto p0 = predict(zero, std::vector<double>{3});
  CHECK(p0.raw_score == 0.0);
  CHECK(p0.label == 0);
  CHECK(!p0.probability.has_value());

  const auto d = Dataset::from_rows({{-2}, {2}}, {0, 1});
  const auto m = train(d, with(Family::SVM, [](auto& p) { p.reg_param = 0.01; }));
  CHECK(predict(m, d.row(0)).label == 0);
  CHECK(predict(m, d.row(1)).label == 1);

  const auto pos = Dataset::from_rows({{-1}, {0.5}, {2}}, {1, 1, 1});
  const auto mp = train(pos, ClassifierParams::defaults(Family::SVM));
  CHECK(std::get<SvmModel>(mp.body).linear.intercept > 0);
  for (double x : {-5.0, 0.0, 5.0}) CHECK(predict(mp, std::vector<double>{x}).label == 1);
}

TEST_CASE("prediction contract: probabilities, purity, dimension errors") {
  const auto d = benefits_data(600, 10);
  for (Family f : kAllFamilies) {
    auto p = ClassifierParams::defaults(f);
    if (f == Family::RF) p.num_trees = 10;
    const auto m = train(d, p);
    for (std::size_t i = 0; i < d.rows; i += 13) {
      const auto a = predict(m, d.row(i));
      CHECK(a == predict(m, d.row(i)));
      CHECK(std::isfinite(a.raw_score));
      if (f == Family::SVM) {
        CHECK(!a.probability);
      } else {
        REQUIRE(a.probability);
        CHECK((*a.probability >= 0.0 && *a.probability <= 1.0));
        CHECK(a.label == (*a.probability > p.threshold ? 1 : 0));
      }
    }
    CHECK_THROWS(predict(m, std::vector<double>{1.0}));
    CHECK_THROWS(predict(m, std::vector<double>(d.cols, NAN)));
    CHECK(model_to_json(model_from_json(model_to_json(m))).dump() == model_to_json(m).dump());
  }
}

TEST_CASE("importances: published vector, constant feature, unsupported families") {
  const std::vector<double> published{0.555733, 0.162801, 0.131934, 0.12204, 0.015729, 0.011764, 0};
  CHECK(std::accumulate(published.begin(), published.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(valid_importances(published, 1e-5));

  const auto d = benefits_data(2000, 1);
  for (Family f : {Family::DT, Family::RF, Family::GBT}) {
    auto p = ClassifierParams::defaults(f);
    if (f == Family::RF) p.num_trees = 10;
    const auto imp = feature_importances(train(d, p));
    CHECK(valid_importances(imp));
    // IsEHB is the sixth assembled column and never varies
    CHECK(imp[5] == 0.0);
  }
  for (Family f : {Family::LR, Family::FM, Family::SVM})
    CHECK_THROWS_AS(feature_importances(train(d, ClassifierParams::defaults(f))), std::invalid_argument);
}

TEST_CASE("golden prediction triples") {
  const auto d = benefits_data(300, 12);
  nlohmann::json current = nlohmann::json::object();
  for (Family f : kAllFamilies) {
    auto p = ClassifierParams::defaults(f);
    if (f == Family::RF) p.num_trees = 5;
    const auto m = train(d, p);
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i : {0, 7, 150}) {
      const auto pr = predict(m, d.row(i));
      rows.push_back({{"row", i}, {"rawScore", pr.raw_score},
                      {"probability", pr.probability ? nlohmann::json(*pr.probability) : nlohmann::json()},
                      {"prediction", pr.label}});
    }
    current[std::string(family_tag(f))] = rows;
  }
  if (std::getenv("BENEFITML_WRITE_GOLDEN")) {
    std::filesystem::create_directories(golden_path().parent_path());
    save_json(current, golden_path());
  }
  const auto golden = load_json(golden_path());
  for (const auto& [tag, rows] : golden.items()) {
    REQUIRE(current.contains(tag));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CAPTURE(tag);
      CHECK(current[tag][i]["prediction"] == rows[i]["prediction"]);
      CHECK(current[tag][i]["rawScore"].get<double>() == doctest::Approx(rows[i]["rawScore"].get<double>()).epsilon(1e-12));
      if (!rows[i]["probability"].is_null())
        CHECK(current[tag][i]["probability"].get<double>() ==
              doctest::Approx(rows[i]["probability"].get<double>()).epsilon(1e-12));
    }
  }
}

TEST_CASE("training is independent of thread count") {
  const auto d = benefits_data(1000, 7);
  for (Family f : {Family::RF, Family::GBT, Family::DT}) {
    auto p = ClassifierParams::defaults(f);
    if (f == Family::RF) p.num_trees = 12;
    CHECK(model_to_json(train(d, p, 1)).dump() == model_to_json(train(d, p, 3)).dump());
  }
}
