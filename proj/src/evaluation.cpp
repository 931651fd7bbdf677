#include "benefitml/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "benefitml/error.hpp"
#include "benefitml/feature_vector.hpp"
#include "benefitml/pipeline.hpp"

namespace benefitml {

using nlohmann::json;

ConfusionCounts confusion(std::span<const ScoredRow> rows) {
  if (rows.empty()) throw std::invalid_argument("confusion: no rows");
  ConfusionCounts c;
  for (const auto& r : rows) {
    if ((r.label != 0 && r.label != 1) || (r.prediction != 0 && r.prediction != 1))
      throw DataError("confusion: label and prediction must be 0 or 1");
    if (r.prediction == 1)
      (r.label == 1 ? c.tp : c.fp)++;
    else
      (r.label == 1 ? c.fn : c.tn)++;
  }
  return c;
}

ScalarMetrics scalar_metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw std::invalid_argument("scalar_metrics: all counts are zero");
  const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const double tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
  ScalarMetrics m;
  m.precision = c.tp + c.fp == 0 ? 1.0 : tp / (tp + fp);
  m.recall = c.tp + c.fn == 0 ? 1.0 : tp / (tp + fn);
  m.f1 = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  m.accuracy = (tp + tn) / static_cast<double>(c.total());
  return m;
}

namespace {

struct Step {
  std::uint64_t pos = 0;
  std::uint64_t neg = 0;
};

// Positive and negative counts per distinct score, highest score first.
std::vector<Step> threshold_steps(std::span<const ScoredRow> rows, std::uint64_t& positives,
                                  std::uint64_t& negatives) {
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (const auto& r : rows)
    if (std::isnan(r.score)) throw DataError("curve: NaN score");
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rows[a].score > rows[b].score; });
  std::vector<Step> steps;
  positives = negatives = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& r = rows[order[k]];
    if (k == 0 || r.score != rows[order[k - 1]].score) steps.emplace_back();
    if (r.label == 1) {
      ++steps.back().pos;
      ++positives;
    } else {
      ++steps.back().neg;
      ++negatives;
    }
  }
  return steps;
}

}  // namespace

Curve roc_curve(std::span<const ScoredRow> rows) {
  std::uint64_t P = 0, N = 0;
  const auto steps = threshold_steps(rows, P, N);
  if (P == 0 || N == 0) throw DataError("ROC AUC is undefined for single-class input");
  Curve c;
  c.points.push_back({0.0, 0.0});
  std::uint64_t tp = 0, fp = 0;
  double prev_x = 0.0, prev_y = 0.0;
  for (const auto& s : steps) {
    tp += s.pos;
    fp += s.neg;
    const double x = static_cast<double>(fp) / static_cast<double>(N);
    const double y = static_cast<double>(tp) / static_cast<double>(P);
    c.area += (x - prev_x) * (y + prev_y) * 0.5;
    c.points.push_back({x, y});
    prev_x = x;
    prev_y = y;
  }
  return c;
}

Curve pr_curve(std::span<const ScoredRow> rows) {
  std::uint64_t P = 0, N = 0;
  const auto steps = threshold_steps(rows, P, N);
  if (P == 0) throw DataError("PR AUC is undefined without positive labels");
  Curve c;
  std::uint64_t tp = 0, fp = 0;
  double prev_recall = 0.0;
  for (const auto& s : steps) {
    tp += s.pos;
    fp += s.neg;
    const double recall = static_cast<double>(tp) / static_cast<double>(P);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    c.area += (recall - prev_recall) * precision;
    c.points.push_back({recall, precision});
    prev_recall = recall;
  }
  return c;
}

EvalReport evaluate(std::span<const ScoredRow> rows, double fit_minutes) {
  EvalReport r;
  r.counts = confusion(rows);
  r.metrics = scalar_metrics(r.counts);
  r.fit_minutes = fit_minutes;
  const bool has_pos = r.counts.tp + r.counts.fn > 0;
  const bool has_neg = r.counts.fp + r.counts.tn > 0;
  if (has_pos && has_neg) {
    auto roc = roc_curve(rows);
    r.auc_roc = roc.area;
    r.roc_points = std::move(roc.points);
  }
  if (has_pos) {
    auto pr = pr_curve(rows);
    r.auc_pr = pr.area;
    r.pr_points = std::move(pr.points);
  }
  return r;
}

std::vector<ScoredRow> scored_rows(const DataTable& predictions) {
  const auto& raw = predictions.numeric(kRawScoreColumn);
  const auto& pred = predictions.numeric(kPredictionColumn);
  const auto& truth = predictions.numeric(kTrueLabelColumn);
  std::vector<ScoredRow> rows;
  rows.reserve(predictions.row_count());
  for (std::size_t i = 0; i < predictions.row_count(); ++i) {
    if (!raw[i] || !pred[i] || !truth[i])
      throw DataError("prediction table has a null at row " + std::to_string(i + 1));
    rows.push_back({*raw[i], static_cast<int>(*truth[i]), static_cast<int>(*pred[i])});
  }
  return rows;
}

namespace {

json points_json(const std::vector<CurvePoint>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back({p.x, p.y});
  return a;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json report_to_json(const EvalReport& r) {
  return json{{"counts", {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"tn", r.counts.tn}, {"fn", r.counts.fn}}},
              {"precision", r.metrics.precision},
              {"recall", r.metrics.recall},
              {"f1", r.metrics.f1},
              {"accuracy", r.metrics.accuracy},
              {"auc_roc", optional_json(r.auc_roc)},
              {"auc_pr", optional_json(r.auc_pr)},
              {"roc_points", points_json(r.roc_points)},
              {"pr_points", points_json(r.pr_points)},
              {"fit_minutes", r.fit_minutes},
              {"metadata", r.metadata}};
}

std::string render_confusion_table(const EvalReport& r) {
  const std::vector<std::pair<std::string, std::string>> rows{
      {"TP", format_double(static_cast<double>(r.counts.tp))},
      {"FP", format_double(static_cast<double>(r.counts.fp))},
      {"TN", format_double(static_cast<double>(r.counts.tn))},
      {"FN", format_double(static_cast<double>(r.counts.fn))},
      {"Precision", format_double(r.metrics.precision)},
      {"Recall", format_double(r.metrics.recall)},
  };
  std::size_t kw = 6, vw = 5;
  for (const auto& [k, v] : rows) {
    kw = std::max(kw, k.size());
    vw = std::max(vw, v.size());
  }
  std::ostringstream out;
  auto rule = [&] { out << '+' << std::string(kw + 2, '-') << '+' << std::string(vw + 2, '-') << "+\n"; };
  auto line = [&](const std::string& k, const std::string& v) {
    out << "| " << k << std::string(kw - k.size(), ' ') << " | " << v << std::string(vw - v.size(), ' ') << " |\n";
  };
  rule();
  line("metric", "value");
  rule();
  for (const auto& [k, v] : rows) line(k, v);
  rule();
  return out.str();
}

void write_curve_csv(const std::vector<CurvePoint>& points, const std::string& x_name,
                     const std::string& y_name, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << x_name << ',' << y_name << '\n';
  for (const auto& p : points) out << format_double(p.x) << ',' << format_double(p.y) << '\n';
}

}  // namespace benefitml
