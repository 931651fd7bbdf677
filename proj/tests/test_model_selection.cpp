#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>

#include "benefitml/data_ops.hpp"
#include "benefitml/error.hpp"
#include "benefitml/model_selection.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace benefitml;

namespace {

const std::filesystem::path kSvmGrid = std::filesystem::path(BENEFITML_SOURCE_DIR) / "tools/grids/svm_full.json";

// Mean held-out AUC of one parameter set on the given folds, computed
// without the library's CV loop.
double manual_cell(const PipelineSpec& base, const ClassifierParams& params, const DataTable& data,
                   const std::vector<std::vector<std::size_t>>& folds) {
  double sum = 0.0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> train_rows;
    for (std::size_t g = 0; g < folds.size(); ++g)
      if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
    std::sort(train_rows.begin(), train_rows.end());
    const auto fitted = pipeline_fit(base.with_classifier(params), data.select_rows(train_rows));
    const auto out = fitted.transform(data.select_rows(folds[f]));
    std::vector<double> s;
    std::vector<int> y;
    for (std::size_t r = 0; r < out.row_count(); ++r) {
      s.push_back(*out.numeric(kRawScoreColumn)[r]);
      y.push_back(static_cast<int>(*out.numeric(kTrueLabelColumn)[r]));
    }
    sum += oracle::concordance_auc(s, y);
  }
  return sum / static_cast<double>(folds.size());
}

}  // namespace

TEST_CASE("grid: sizes and order") {
  const auto axes = load_axes(kSvmGrid.string());
  REQUIRE(axes.size() == 5);
  std::size_t product = 1;
  for (const auto& a : axes) product *= a.values.size();
  const auto cells = build_param_grid(ClassifierParams::defaults(Family::SVM), axes);
  CHECK(cells.size() == product);
  CHECK(cells.size() == 32);
  CHECK(axes.front().name == "regParam");
  // first axis slowest
  CHECK(cells[0].reg_param == 0.01);
  CHECK(cells[15].reg_param == 0.01);
  CHECK(cells[16].reg_param == 0.5);
  CHECK(cells[0].standardization != cells[1].standardization);

  const auto base = ClassifierParams::defaults(Family::LR);
  CHECK(build_param_grid(base, {}) == std::vector<ClassifierParams>{base});
  const auto two = build_param_grid(base, {{"maxIter", {3, 7}}});
  REQUIRE(two.size() == 2);
  auto a = two[0], b = two[1];
  CHECK(a.max_iter == 3);
  CHECK(b.max_iter == 7);
  b.max_iter = 3;
  CHECK(a == b);
}

TEST_CASE("grid: bad axes") {
  const auto base = ClassifierParams::defaults(Family::LR);
  CHECK_THROWS(build_param_grid(base, {{"numTrees", {10}}}));
  CHECK_THROWS(build_param_grid(base, {{"regParam", {}}}));
  CHECK_THROWS(build_param_grid(base, {{"regParam", {0.1}}, {"regParam", {0.2}}}));
  CHECK_THROWS(build_param_grid(base, {{"regParam", {-1.0}}}));
  CHECK(axes_to_json(axes_from_json(axes_to_json(default_axes(Family::GBT)))) == axes_to_json(default_axes(Family::GBT)));
  for (Family f : kAllFamilies) CHECK(default_grid(f).size() >= 2);
}

TEST_CASE("folds partition the rows") {
  for (int k : {2, 3, 5}) {
    const auto folds = make_folds(101, k, 9);
    REQUIRE(folds.size() == static_cast<std::size_t>(k));
    std::multiset<std::size_t> seen;
    for (const auto& f : folds) {
      CHECK(std::is_sorted(f.begin(), f.end()));
      seen.insert(f.begin(), f.end());
    }
    CHECK(seen.size() == 101);
    CHECK(std::set<std::size_t>(seen.begin(), seen.end()).size() == 101);
  }
  CHECK(make_folds(50, 3, 4) == make_folds(50, 3, 4));
  CHECK(make_folds(50, 3, 4) != make_folds(50, 3, 5));
  CHECK_THROWS(make_folds(5, 1, 1));
  CHECK_THROWS(make_folds(2, 3, 1));
}

TEST_CASE("cross validation: one cell reduces to manual evaluation") {
  const auto data = fixtures::interaction(450, 3);
  const auto spec = fixtures::interaction_pipeline(data);
  CVConfig cfg;
  cfg.seed = 11;
  auto params = ClassifierParams::defaults(Family::DT);
  params.max_depth = 3;
  const auto r = cross_validate(spec, std::vector<ClassifierParams>{params}, data, cfg);
  CHECK(r.best_index == 0);
  CHECK(r.best_params == params);
  CHECK(r.cells[0].fold_metrics.size() == 3);
  CHECK(r.cells[0].mean_metric == doctest::Approx(manual_cell(spec, params, data, r.folds)).epsilon(1e-12));
  CHECK(r.model.classifier()->model.params == params);
}

TEST_CASE("cross validation: picks the better cell, deterministic across threads") {
  const auto data = fixtures::interaction(600, 5);
  const auto spec = fixtures::interaction_pipeline(data);
  // depth 1 cannot see the XOR signal; depth 4 can
  ParamGrid grid{ClassifierParams::defaults(Family::DT), {{"maxDepth", {1, 4}}}};
  CVConfig cfg;
  cfg.seed = 2;
  const auto r1 = cross_validate(spec, grid, data, cfg);

  const auto cells = build_param_grid(grid);
  const double a = manual_cell(spec, cells[0], data, r1.folds);
  const double b = manual_cell(spec, cells[1], data, r1.folds);
  REQUIRE(b > a);
  CHECK(r1.best_index == 1);
  CHECK(r1.cells[0].mean_metric == doctest::Approx(a).epsilon(1e-12));
  CHECK(r1.cells[1].mean_metric == doctest::Approx(b).epsilon(1e-12));
  for (const auto& c : r1.cells) CHECK(r1.best().mean_metric >= c.mean_metric);

  cfg.threads = 4;
  const auto r4 = cross_validate(spec, grid, data, cfg);
  auto strip = [](nlohmann::json j) {
    j.erase("fit_minutes");
    return j.dump();
  };
  CHECK(strip(cv_result_to_json(r4)) == strip(cv_result_to_json(r1)));
  CHECK(fitted_pipeline_to_json(r4.model).dump() == fitted_pipeline_to_json(r1.model).dump());
}

TEST_CASE("cross validation: refit uses every row") {
  const auto data = fixtures::interaction(300, 8);
  const auto spec = fixtures::interaction_pipeline(data);
  auto params = ClassifierParams::defaults(Family::DT);
  const auto r = cross_validate(spec, std::vector<ClassifierParams>{params}, data, CVConfig{});
  const auto direct = pipeline_fit(spec.with_classifier(params), data);
  CHECK(fitted_pipeline_to_json(r.model).dump() == fitted_pipeline_to_json(direct).dump());
}

TEST_CASE("cross validation: single-class folds fail loudly") {
  auto data = fixtures::interaction(60, 1);
  LabelCells ones(data.row_count(), 1);
  ones[0] = 0;
  std::vector<Column> cols;
  for (std::size_t i = 0; i < data.column_count(); ++i)
    if (data.column(i).spec.name != "label") cols.push_back(data.column(i));
  cols.push_back(Column{{"label", ColumnKind::label, false}, ones});
  const DataTable skewed(cols);
  CHECK_THROWS_AS(cross_validate(fixtures::interaction_pipeline(skewed),
                                 std::vector<ClassifierParams>{ClassifierParams::defaults(Family::LR)}, skewed,
                                 CVConfig{}),
                  DataError);
}

TEST_CASE("benchmark: requested order, table and JSON agree") {
  const auto data = fixtures::benefits(900, 3);
  const auto [train, test] = train_test_split(data, 0.3, 1);
  CVConfig cfg;
  const auto report = benchmark(train, test, default_benefits_pipeline(),
                                {default_grid(Family::GBT), default_grid(Family::LR)}, cfg);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].family == Family::GBT);
  CHECK(report.rows[1].family == Family::LR);
  CHECK(!report.any_failed());

  const auto j = benchmark_to_json(report);
  const auto text = render_benchmark_table(report);
  for (const char* col : {"Model", "Comp Time (mins)", "Precision", "Recall", "AUC ROC", "AUC PR"})
    CHECK(text.find(col) != std::string::npos);
  REQUIRE(j["rows"].size() == 2);
  for (const auto& row : j["rows"]) {
    for (const char* key : {"precision", "recall", "auc_roc", "auc_pr"})
      CHECK(text.find(format_double(row[key].get<double>())) != std::string::npos);
  }
}

TEST_CASE("benchmark: a failing family is reported, others still run") {
  const auto data = fixtures::benefits(600, 4);
  const auto [train, test] = train_test_split(data, 0.3, 2);
  ParamGrid broken{ClassifierParams::defaults(Family::DT), {{"maxDepth", {0}}}};
  const auto report = benchmark(train, test, default_benefits_pipeline(), {broken, default_grid(Family::LR)}, CVConfig{});
  REQUIRE(report.rows.size() == 2);
  CHECK(report.any_failed());
  CHECK(report.rows[0].error.has_value());
  CHECK(report.rows[1].report.has_value());
  CHECK(render_benchmark_table(report).find("FAILED") != std::string::npos);
}

TEST_CASE("cv config validation and JSON") {
  CVConfig c;
  c.folds = 1;
  CHECK_THROWS(c.validate());
  c.folds = 4;
  c.metric = CvMetric::auc_pr;
  c.seed = 77;
  const auto back = cv_config_from_json(cv_config_to_json(c));
  CHECK(back.folds == 4);
  CHECK(back.metric == CvMetric::auc_pr);
  CHECK(back.seed == 77);
  CHECK_THROWS(cv_metric_from_string("accuracy"));
}
