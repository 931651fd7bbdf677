#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "benefitml/classifier.hpp"
#include "benefitml/data_table.hpp"
#include "benefitml/evaluation.hpp"
#include "benefitml/pipeline.hpp"

namespace benefitml {

struct ParamAxis {
  std::string name;  // camelCase, see parameter_names
  std::vector<nlohmann::json> values;
};

struct ParamGrid {
  ClassifierParams base;
  std::vector<ParamAxis> axes;

  std::size_t size() const;
};

// Cartesian product; the first axis varies slowest.
std::vector<ClassifierParams> build_param_grid(const ClassifierParams& base, const std::vector<ParamAxis>& axes);
inline std::vector<ClassifierParams> build_param_grid(const ParamGrid& grid) {
  return build_param_grid(grid.base, grid.axes);
}

// The tuned axes for each family when no grid file is given.
std::vector<ParamAxis> default_axes(Family family);
ParamGrid default_grid(Family family);

// {"regParam": [0.01, 0.5], ...} or {"axes": {...}}; key order is kept.
std::vector<ParamAxis> axes_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json axes_to_json(const std::vector<ParamAxis>& axes);
std::vector<ParamAxis> load_axes(const std::string& path);

enum class CvMetric { auc_roc, auc_pr };
std::string_view to_string(CvMetric m);
CvMetric cv_metric_from_string(std::string_view s);

struct CVConfig {
  int folds = 3;
  CvMetric metric = CvMetric::auc_roc;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string features = "features";
  std::string label = "label";

  void validate() const;
};

nlohmann::json cv_config_to_json(const CVConfig& c);
CVConfig cv_config_from_json(const nlohmann::json& j);

// Seeded shuffle cut into k contiguous chunks; each fold is sorted.
std::vector<std::vector<std::size_t>> make_folds(std::size_t rows, int k, std::uint64_t seed);

struct CellResult {
  ClassifierParams params;
  nlohmann::ordered_json param_map = nlohmann::ordered_json::object();  // tuned axes, grid order
  std::vector<double> fold_metrics;
  double mean_metric = 0.0;
  std::optional<std::string> error;

  bool ok() const noexcept { return !error.has_value(); }
};

struct CVResult {
  std::vector<std::vector<std::size_t>> folds;
  std::vector<CellResult> cells;
  std::size_t best_index = 0;
  ClassifierParams best_params;
  FittedPipeline model;  // refit on all rows with best_params
  double fit_minutes = 0.0;

  const CellResult& best() const { return cells.at(best_index); }
};

// Scores one fitted pipeline on a held-out table with the configured metric.
double score_pipeline(const FittedPipeline& fitted, const DataTable& holdout, CvMetric metric);

CVResult cross_validate(const PipelineSpec& spec, const ParamGrid& grid, const DataTable& data,
                        const CVConfig& config);
CVResult cross_validate(const PipelineSpec& spec, const std::vector<ClassifierParams>& cells,
                        const DataTable& data, const CVConfig& config);

nlohmann::json cv_result_to_json(const CVResult& r);

struct BenchmarkRow {
  Family family = Family::LR;
  double fit_minutes = 0.0;
  std::optional<EvalReport> report;
  std::optional<ClassifierParams> best_params;
  std::optional<std::string> error;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;

  bool any_failed() const;
};

// Cross-validates each family's grid on `train` (timed), then evaluates the
// refit model on `test`. Rows follow the order of `grids`.
BenchmarkReport benchmark(const DataTable& train, const DataTable& test, const PipelineSpec& spec,
                          const std::vector<ParamGrid>& grids, const CVConfig& config);

nlohmann::json benchmark_to_json(const BenchmarkReport& report);
// Model | Comp Time (mins) | Precision | Recall | AUC ROC | AUC PR
std::string render_benchmark_table(const BenchmarkReport& report);

}  // namespace benefitml
