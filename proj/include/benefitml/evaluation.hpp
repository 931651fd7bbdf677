#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "benefitml/data_table.hpp"

namespace benefitml {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct ScoredRow {
  double score = 0.0;  // probability or margin; only its ordering matters
  int label = 0;
  int prediction = 0;
};

struct ScalarMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
};

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
};

// ROC: x = FPR, y = TPR, starting at (0,0). PR: x = recall, y = precision,
// one point per distinct score threshold.
struct Curve {
  std::vector<CurvePoint> points;
  double area = 0.0;
};

ConfusionCounts confusion(std::span<const ScoredRow> rows);
// Zero denominators: precision = 1 with no positive predictions, recall = 1
// with no actual positives, f1 = 0 when precision + recall = 0.
ScalarMetrics scalar_metrics(const ConfusionCounts& counts);

// Rows with equal scores form a single threshold step, so the trapezoid area
// equals P(score+ > score-) + 1/2 P(tie). Needs both classes.
Curve roc_curve(std::span<const ScoredRow> rows);
// Average precision: sum over steps of (R_i - R_{i-1}) * P_i. Needs a positive.
Curve pr_curve(std::span<const ScoredRow> rows);

struct EvalReport {
  ConfusionCounts counts;
  ScalarMetrics metrics;
  std::optional<double> auc_roc;  // absent when the rows hold a single class
  std::optional<double> auc_pr;
  std::vector<CurvePoint> roc_points;
  std::vector<CurvePoint> pr_points;
  double fit_minutes = 0.0;
  nlohmann::json metadata = nlohmann::json::object();
};

EvalReport evaluate(std::span<const ScoredRow> rows, double fit_minutes = 0.0);

// Reads rawScore, prediction and trueLabel columns written by a fitted pipeline.
std::vector<ScoredRow> scored_rows(const DataTable& predictions);

nlohmann::json report_to_json(const EvalReport& report);
// Two-column metric/value table: TP, FP, TN, FN, Precision, Recall.
std::string render_confusion_table(const EvalReport& report);
void write_curve_csv(const std::vector<CurvePoint>& points, const std::string& x_name,
                     const std::string& y_name, const std::filesystem::path& path);

// Runs fit() and returns its result with the elapsed wall-clock minutes.
template <typename Fit>
auto timed_fit(Fit&& fit) {
  const auto start = std::chrono::steady_clock::now();
  auto result = std::forward<Fit>(fit)();
  const std::chrono::duration<double, std::ratio<60>> elapsed = std::chrono::steady_clock::now() - start;
  return std::pair{std::move(result), elapsed.count()};
}

}  // namespace benefitml
