#include "benefitml/model_selection.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "benefitml/error.hpp"
#include "benefitml/feature_vector.hpp"
#include "benefitml/parallel.hpp"
#include "benefitml/rng.hpp"

namespace benefitml {

using nlohmann::json;
using nlohmann::ordered_json;

std::size_t ParamGrid::size() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.values.size();
  return n;
}

std::vector<ClassifierParams> build_param_grid(const ClassifierParams& base, const std::vector<ParamAxis>& axes) {
  const auto& names = parameter_names(base.family);
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const auto& a = axes[i];
    if (std::find(names.begin(), names.end(), a.name) == names.end()) {
      std::string valid;
      for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
      throw std::invalid_argument("unknown grid axis '" + a.name + "' for family " +
                                  std::string(family_tag(base.family)) + " (valid: " + valid + ")");
    }
    if (a.values.empty()) throw std::invalid_argument("grid axis '" + a.name + "' has no values");
    for (std::size_t j = 0; j < i; ++j)
      if (axes[j].name == a.name) throw std::invalid_argument("grid axis '" + a.name + "' repeated");
  }
  std::vector<ClassifierParams> cells{base};
  for (const auto& a : axes) {
    std::vector<ClassifierParams> next;
    next.reserve(cells.size() * a.values.size());
    for (const auto& c : cells)
      for (const auto& v : a.values) {
        auto p = c;
        set_param(p, a.name, v);
        next.push_back(std::move(p));
      }
    cells = std::move(next);
  }
  for (const auto& c : cells) c.validate();
  return cells;
}

std::vector<ParamAxis> default_axes(Family family) {
  switch (family) {
    case Family::LR: return {{"regParam", {0.01, 0.1}}};
    case Family::DT: return {{"maxDepth", {3, 5}}};
    case Family::RF: return {{"maxDepth", {4, 5}}};
    case Family::FM: return {{"stepSize", {0.05, 0.1}}};
    case Family::GBT: return {{"maxDepth", {3, 5}}};
    case Family::SVM: return {{"regParam", {0.1, 0.5}}};
  }
  return {};
}

ParamGrid default_grid(Family family) { return {ClassifierParams::defaults(family), default_axes(family)}; }

std::vector<ParamAxis> axes_from_json(const ordered_json& j) {
  const ordered_json& obj = j.is_object() && j.contains("axes") ? j.at("axes") : j;
  if (!obj.is_object()) throw FormatError("grid must be an object mapping parameter names to value lists");
  std::vector<ParamAxis> axes;
  for (const auto& [name, values] : obj.items()) {
    if (!values.is_array()) throw FormatError("grid axis '" + name + "' must be a list");
    ParamAxis a{name, {}};
    for (const auto& v : values) a.values.push_back(json::parse(v.dump()));
    axes.push_back(std::move(a));
  }
  return axes;
}

ordered_json axes_to_json(const std::vector<ParamAxis>& axes) {
  ordered_json j = ordered_json::object();
  for (const auto& a : axes) {
    ordered_json vals = ordered_json::array();
    for (const auto& v : a.values) vals.push_back(ordered_json::parse(v.dump()));
    j[a.name] = vals;
  }
  return j;
}

std::vector<ParamAxis> load_axes(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read grid file '" + path + "'");
  try {
    return axes_from_json(ordered_json::parse(in));
  } catch (const ordered_json::parse_error& e) {
    throw FormatError("grid file '" + path + "': " + e.what());
  }
}

std::string_view to_string(CvMetric m) { return m == CvMetric::auc_roc ? "auc_roc" : "auc_pr"; }

CvMetric cv_metric_from_string(std::string_view s) {
  if (s == "auc_roc") return CvMetric::auc_roc;
  if (s == "auc_pr") return CvMetric::auc_pr;
  throw std::invalid_argument("unknown metric '" + std::string(s) + "' (expected auc_roc or auc_pr)");
}

void CVConfig::validate() const {
  if (folds < 2) throw std::invalid_argument("folds must be at least 2");
}

json cv_config_to_json(const CVConfig& c) {
  return json{{"folds", c.folds}, {"metric", to_string(c.metric)}, {"seed", c.seed},
              {"threads", c.threads}, {"features", c.features}, {"label", c.label}};
}

CVConfig cv_config_from_json(const json& j) {
  CVConfig c;
  if (j.contains("folds")) c.folds = j.at("folds").get<int>();
  if (j.contains("metric")) c.metric = cv_metric_from_string(j.at("metric").get<std::string>());
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
  if (j.contains("features")) c.features = j.at("features").get<std::string>();
  if (j.contains("label")) c.label = j.at("label").get<std::string>();
  c.validate();
  return c;
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t rows, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("folds must be at least 2");
  if (rows < static_cast<std::size_t>(k))
    throw DataError("cannot make " + std::to_string(k) + " folds from " + std::to_string(rows) + " rows");
  Rng rng(seed);
  const auto perm = rng.permutation(rows);
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  const auto kk = static_cast<std::size_t>(k);
  for (std::size_t f = 0; f < kk; ++f) {
    folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(f * rows / kk),
                    perm.begin() + static_cast<std::ptrdiff_t>((f + 1) * rows / kk));
    std::sort(folds[f].begin(), folds[f].end());
  }
  return folds;
}

double score_pipeline(const FittedPipeline& fitted, const DataTable& holdout, CvMetric metric) {
  const auto scored = fitted.transform(holdout);
  const auto rows = scored_rows(scored);
  return metric == CvMetric::auc_roc ? roc_curve(rows).area : pr_curve(rows).area;
}

namespace {

std::vector<int> label_values(const DataTable& t, const std::string& label) {
  const auto& col = t.column(label);
  std::vector<int> out(t.row_count(), -1);
  if (col.spec.kind == ColumnKind::label) {
    const auto& cells = t.labels(label);
    for (std::size_t i = 0; i < out.size(); ++i)
      if (cells[i]) out[i] = *cells[i];
  } else if (col.spec.kind == ColumnKind::numeric) {
    const auto& cells = t.numeric(label);
    for (std::size_t i = 0; i < out.size(); ++i)
      if (cells[i]) out[i] = static_cast<int>(*cells[i]);
  } else {
    throw SchemaError("label column '" + label + "' must be a label or numeric column");
  }
  return out;
}

bool both_classes(const std::vector<int>& labels, std::span<const std::size_t> rows) {
  bool pos = false, neg = false;
  for (auto r : rows) {
    pos = pos || labels[r] == 1;
    neg = neg || labels[r] == 0;
  }
  return pos && neg;
}

ordered_json param_map_of(const ClassifierParams& p, const std::vector<std::string>& axes) {
  ordered_json m = ordered_json::object();
  for (const auto& a : axes) m[a] = ordered_json::parse(get_param(p, a).dump());
  return m;
}

CVResult run_cv(const PipelineSpec& spec, const std::vector<ClassifierParams>& cells,
                const std::vector<std::string>& axis_names, const DataTable& data, const CVConfig& config) {
  config.validate();
  if (cells.empty()) throw std::invalid_argument("cross_validate: empty grid");
  const auto start = std::chrono::steady_clock::now();
  CVResult result;
  result.folds = make_folds(data.row_count(), config.folds, config.seed);
  const auto labels = label_values(data, config.label);
  const std::size_t k = result.folds.size();

  std::vector<std::vector<std::size_t>> train_rows(k);
  std::vector<DataTable> train_tables, valid_tables;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<char> held(data.row_count(), 0);
    for (auto r : result.folds[f]) held[r] = 1;
    for (std::size_t r = 0; r < data.row_count(); ++r)
      if (!held[r]) train_rows[f].push_back(r);
    train_tables.push_back(data.select_rows(train_rows[f]));
    valid_tables.push_back(data.select_rows(result.folds[f]));
  }

  const std::size_t tasks = cells.size() * k;
  std::vector<double> metric(tasks, 0.0);
  std::vector<std::optional<std::string>> errors(tasks);
  const unsigned inner = std::max(1u, config.threads / static_cast<unsigned>(std::max<std::size_t>(1, tasks)));
  parallel_for(tasks, config.threads, [&](std::size_t t) {
    const std::size_t c = t / k, f = t % k;
    try {
      if (!both_classes(labels, train_rows[f]))
        throw DataError("training portion of fold " + std::to_string(f + 1) + " has a single class");
      const auto fitted = pipeline_fit(spec.with_classifier(cells[c], config.features, config.label),
                                       train_tables[f], inner);
      metric[t] = score_pipeline(fitted, valid_tables[f], config.metric);
    } catch (const std::exception& e) {
      errors[t] = "fold " + std::to_string(f + 1) + ": " + e.what();
    }
  });

  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    CellResult cell;
    cell.params = cells[c];
    cell.param_map = param_map_of(cells[c], axis_names);
    for (std::size_t f = 0; f < k; ++f) {
      const std::size_t t = c * k + f;
      if (errors[t] && !cell.error) cell.error = errors[t];
      cell.fold_metrics.push_back(metric[t]);
    }
    if (cell.ok()) {
      double sum = 0.0;
      for (double m : cell.fold_metrics) sum += m;
      cell.mean_metric = sum / static_cast<double>(k);
      if (!best || cell.mean_metric > result.cells[*best].mean_metric) best = c;
    }
    result.cells.push_back(std::move(cell));
  }
  if (!best) throw DataError("cross-validation failed for every grid cell; first error: " + *result.cells[0].error);
  result.best_index = *best;
  result.best_params = cells[*best];
  result.model = pipeline_fit(spec.with_classifier(result.best_params, config.features, config.label), data,
                              config.threads);
  const std::chrono::duration<double, std::ratio<60>> elapsed = std::chrono::steady_clock::now() - start;
  result.fit_minutes = elapsed.count();
  return result;
}

}  // namespace

CVResult cross_validate(const PipelineSpec& spec, const ParamGrid& grid, const DataTable& data,
                        const CVConfig& config) {
  std::vector<std::string> names;
  for (const auto& a : grid.axes) names.push_back(a.name);
  return run_cv(spec, build_param_grid(grid), names, data, config);
}

CVResult cross_validate(const PipelineSpec& spec, const std::vector<ClassifierParams>& cells,
                        const DataTable& data, const CVConfig& config) {
  return run_cv(spec, cells, {}, data, config);
}

json cv_result_to_json(const CVResult& r) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    json cj{{"params", json::parse(c.param_map.dump())}, {"fold_metrics", c.fold_metrics}};
    cj["mean_metric"] = c.ok() ? json(c.mean_metric) : json(nullptr);
    if (c.error) cj["error"] = *c.error;
    cells.push_back(std::move(cj));
  }
  return json{{"cells", cells},
              {"best_index", r.best_index},
              {"best_params", params_to_json(r.best_params)},
              {"fit_minutes", r.fit_minutes}};
}

bool BenchmarkReport::any_failed() const {
  return std::any_of(rows.begin(), rows.end(), [](const BenchmarkRow& r) { return r.error.has_value(); });
}

BenchmarkReport benchmark(const DataTable& train, const DataTable& test, const PipelineSpec& spec,
                          const std::vector<ParamGrid>& grids, const CVConfig& config) {
  BenchmarkReport report;
  for (const auto& grid : grids) {
    BenchmarkRow row;
    row.family = grid.base.family;
    try {
      auto [cv, minutes] = timed_fit([&] { return cross_validate(spec, grid, train, config); });
      row.fit_minutes = minutes;
      row.best_params = cv.best_params;
      const auto scored = cv.model.transform(test);
      row.report = evaluate(scored_rows(scored), minutes);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace {

json metric_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json benchmark_to_json(const BenchmarkReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    json j{{"model", family_display_name(r.family)}, {"family", family_tag(r.family)}, {"fit_minutes", r.fit_minutes}};
    if (r.report) {
      j["precision"] = r.report->metrics.precision;
      j["recall"] = r.report->metrics.recall;
      j["auc_roc"] = metric_or_null(r.report->auc_roc);
      j["auc_pr"] = metric_or_null(r.report->auc_pr);
    } else {
      j["precision"] = j["recall"] = j["auc_roc"] = j["auc_pr"] = nullptr;
    }
    if (r.best_params) j["best_params"] = params_to_json(*r.best_params);
    if (r.error) j["error"] = *r.error;
    rows.push_back(std::move(j));
  }
  return json{{"rows", rows}};
}

std::string render_benchmark_table(const BenchmarkReport& report) {
  const std::vector<std::string> header{"Model", "Comp Time (mins)", "Precision", "Recall", "AUC ROC", "AUC PR"};
  std::vector<std::vector<std::string>> body;
  auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("n/a"); };
  for (const auto& r : report.rows) {
    std::vector<std::string> line{std::string(family_display_name(r.family))};
    if (r.error) {
      line.insert(line.end(), {"FAILED", "-", "-", "-", "-"});
    } else {
      line.push_back(format_double(r.fit_minutes));
      line.push_back(format_double(r.report->metrics.precision));
      line.push_back(format_double(r.report->metrics.recall));
      line.push_back(cell(r.report->auc_roc));
      line.push_back(cell(r.report->auc_pr));
    }
    body.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& l : body) width[c] = std::max(width[c], l[c].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& l) {
    for (std::size_t c = 0; c < l.size(); ++c) {
      out << (c ? "  " : "") << l[c];
      if (c + 1 < l.size()) out << std::string(width[c] - l[c].size(), ' ');
    }
    out << '\n';
  };
  emit(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
  for (const auto& l : body) emit(l);
  for (const auto& r : report.rows)
    if (r.error) out << family_display_name(r.family) << " failed: " << *r.error << '\n';
  return out.str();
}

}  // namespace benefitml
