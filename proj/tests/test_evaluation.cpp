#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <thread>

#include "benefitml/error.hpp"
#include "benefitml/evaluation.hpp"
#include "benefitml/rng.hpp"
#include "oracles.hpp"

using namespace benefitml;

namespace {

std::vector<ScoredRow> rows_of(const std::vector<double>& scores, const std::vector<int>& labels, double cut = 0.5) {
  std::vector<ScoredRow> out;
  for (std::size_t i = 0; i < scores.size(); ++i) out.push_back({scores[i], labels[i], scores[i] > cut ? 1 : 0});
  return out;
}

// Random instance with coarse scores so ties are common.
std::vector<ScoredRow> random_rows(Rng& rng, std::size_t n) {
  std::vector<ScoredRow> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = rng.bernoulli(0.6) ? 1 : 0;
    const double s = std::round((rng.uniform() + 0.3 * y) * 20) / 20;
    out.push_back({s, y, s > 0.5 ? 1 : 0});
  }
  if (std::none_of(out.begin(), out.end(), [](auto& r) { return r.label == 0; })) out[0].label = 0;
  if (std::none_of(out.begin(), out.end(), [](auto& r) { return r.label == 1; })) out[0].label = 1;
  return out;
}

std::pair<std::vector<double>, std::vector<int>> unzip(const std::vector<ScoredRow>& rows) {
  std::vector<double> s;
  std::vector<int> y;
  for (const auto& r : rows) s.push_back(r.score), y.push_back(r.label);
  return {s, y};
}

// Reference test set: 11699 TP, 2713 FP, 3 FN, no TN.
std::vector<ScoredRow> skewed_rows() {
  std::vector<ScoredRow> rows;
  rows.insert(rows.end(), 11699, {0.9, 1, 1});
  rows.insert(rows.end(), 2713, {0.8, 0, 1});
  rows.insert(rows.end(), 3, {0.2, 1, 0});
  return rows;
}

}  // namespace

TEST_CASE("confusion and metrics for the skewed test set") {
  const auto rows = skewed_rows();
  const auto c = confusion(rows);
  CHECK(c == ConfusionCounts{11699, 2713, 0, 3});
  const auto m = scalar_metrics(c);
  CHECK(m.precision == doctest::Approx(0.8117540938107133).epsilon(1e-15));
  CHECK(m.recall == doctest::Approx(0.9997436335669116).epsilon(1e-15));
  // hand arithmetic
  CHECK(m.accuracy == doctest::Approx(11699.0 / 14415.0).epsilon(1e-15));
  CHECK(m.accuracy == doctest::Approx(0.811585).epsilon(1e-6));
  const double p = 11699.0 / 14412.0, r = 11699.0 / 11702.0;
  CHECK(m.f1 == doctest::Approx(2 * p * r / (p + r)).epsilon(1e-15));
  // 2TP / (2TP + FP + FN) = 23398 / 26114
  CHECK(m.f1 == doctest::Approx(23398.0 / 26114.0).epsilon(1e-15));
  CHECK(m.f1 == doctest::Approx(0.895994).epsilon(1e-6));
}

TEST_CASE("confusion: perfect, shuffled and empty") {
  const auto rows = rows_of({0.9, 0.1, 0.2, 0.8}, {1, 0, 0, 1});
  const auto c = confusion(rows);
  CHECK(c == ConfusionCounts{2, 0, 2, 0});
  const auto m = scalar_metrics(c);
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.f1 == 1.0);
  CHECK(m.accuracy == 1.0);

  Rng rng(4);
  auto many = random_rows(rng, 150);
  const auto before = confusion(many);
  rng.shuffle(std::span<ScoredRow>(many));
  CHECK(confusion(many) == before);
  CHECK(before.total() == 150);
  CHECK_THROWS(confusion(std::vector<ScoredRow>{}));
}

TEST_CASE("metrics: zero denominators") {
  const auto none_predicted = scalar_metrics({0, 0, 5, 5});
  CHECK(none_predicted.precision == 1.0);
  CHECK(none_predicted.recall == 0.0);
  const auto no_positives = scalar_metrics({0, 3, 2, 0});
  CHECK(no_positives.recall == 1.0);
  CHECK(no_positives.precision == 0.0);
  CHECK(no_positives.f1 == 0.0);
}

TEST_CASE("roc: worked example, perfect ranking, all ties") {
  const auto rows = rows_of({0.9, 0.8, 0.4, 0.3}, {1, 1, 0, 1});
  CHECK(roc_curve(rows).area == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(roc_curve(rows_of({0.9, 0.8, 0.2}, {1, 1, 0})).area == 1.0);
  CHECK(roc_curve(rows_of({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0})).area == 0.5);

  const auto c = roc_curve(rows);
  CHECK(c.points.front().x == 0.0);
  CHECK(c.points.front().y == 0.0);
  CHECK(c.points.back().x == 1.0);
  CHECK(c.points.back().y == 1.0);
}

TEST_CASE("pr: worked example, perfect ranking, constant scores") {
  const auto rows = rows_of({0.9, 0.8, 0.4, 0.3}, {1, 1, 0, 1});
  // hand sweep: (1/3)*1 + (1/3)*1 + (1/3)*(3/4)
  CHECK(pr_curve(rows).area == doctest::Approx(11.0 / 12.0).epsilon(1e-15));
  CHECK(pr_curve(rows_of({0.9, 0.8, 0.2}, {1, 1, 0})).area == 1.0);
  CHECK(pr_curve(rows_of({0.4, 0.4, 0.4, 0.4, 0.4}, {1, 0, 1, 1, 0})).area == doctest::Approx(0.6));
}

TEST_CASE("auc: single class is an error") {
  CHECK_THROWS_AS(roc_curve(rows_of({0.1, 0.9}, {1, 1})), DataError);
  CHECK_THROWS_AS(pr_curve(rows_of({0.1, 0.9}, {0, 0})), DataError);
  const auto report = evaluate(rows_of({0.1, 0.9}, {1, 1}));
  CHECK(!report.auc_roc);
}

TEST_CASE("auc: matches the concordance oracle on random instances") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto rows = random_rows(rng, 1 + rng.below(200));
    const auto [s, y] = unzip(rows);
    if (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), 0) == 0) continue;
    CHECK(roc_curve(rows).area == doctest::Approx(oracle::concordance_auc(s, y)).epsilon(1e-9));
    CHECK(pr_curve(rows).area == doctest::Approx(oracle::average_precision(s, y)).epsilon(1e-9));

    const auto pts = roc_curve(rows).points;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      CHECK(pts[i].x >= pts[i - 1].x);
      CHECK(pts[i].y >= pts[i - 1].y);
    }
  }
}

TEST_CASE("auc: negating scores mirrors the area") {
  Rng rng(23);
  auto rows = random_rows(rng, 120);
  const double a = roc_curve(rows).area;
  for (auto& r : rows) r.score = -r.score;
  CHECK(roc_curve(rows).area == doctest::Approx(1.0 - a).epsilon(1e-12));
}

TEST_CASE("metrics are unchanged by duplicating every row") {
  Rng rng(31);
  const auto rows = random_rows(rng, 90);
  auto twice = rows;
  twice.insert(twice.end(), rows.begin(), rows.end());
  const auto a = evaluate(rows), b = evaluate(twice);
  CHECK(a.metrics.precision == doctest::Approx(b.metrics.precision).epsilon(1e-15));
  CHECK(a.metrics.recall == doctest::Approx(b.metrics.recall).epsilon(1e-15));
  CHECK(a.metrics.f1 == doctest::Approx(b.metrics.f1).epsilon(1e-15));
  CHECK(a.metrics.accuracy == doctest::Approx(b.metrics.accuracy).epsilon(1e-15));
  CHECK(*a.auc_roc == doctest::Approx(*b.auc_roc).epsilon(1e-12));
  CHECK(*a.auc_pr == doctest::Approx(*b.auc_pr).epsilon(1e-12));
}

TEST_CASE("rendered table lists the counts") {
  const auto text = render_confusion_table(evaluate(skewed_rows()));
  for (const char* key : {"TP", "FP", "TN", "FN", "Precision", "Recall", "11699", "2713"})
    CHECK(text.find(key) != std::string::npos);
  const auto j = report_to_json(evaluate(skewed_rows(), 1.5));
  CHECK(j["counts"]["tn"] == 0);
  CHECK(j["fit_minutes"] == 1.5);
}

TEST_CASE("timed_fit measures each call separately") {
  auto [v0, idle] = timed_fit([] { return 1; });
  CHECK(v0 == 1);
  CHECK(idle >= 0.0);
  CHECK(idle < 0.01);
  auto [v1, slept] = timed_fit([] {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    return 2;
  });
  CHECK(v1 == 2);
  CHECK(slept >= 0.0008);
  CHECK(slept <= 0.01);
  auto [v2, again] = timed_fit([] { return 3; });
  CHECK(again < slept);
}
