#pragma once

#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "benefitml/classifier.hpp"
#include "benefitml/data_table.hpp"
#include "benefitml/stages.hpp"

namespace benefitml {

// Terminal estimator: trains on (features, label) and appends rawScore,
// probability, prediction and (when the label is present) trueLabel.
struct ClassifierStageParams {
  std::string features = "features";
  std::string label = "label";
  ClassifierParams params;
};

struct ClassifierStage {
  std::string features;
  std::string label;
  TrainedClassifier model;

  DataTable transform(const DataTable& table) const;
};

inline constexpr const char* kRawScoreColumn = "rawScore";
inline constexpr const char* kProbabilityColumn = "probability";
inline constexpr const char* kPredictionColumn = "prediction";
inline constexpr const char* kTrueLabelColumn = "trueLabel";

using StageSpec = std::variant<StringIndexerParams, ImputerParams, VectorAssembler, VectorIndexerParams,
                               MinMaxParams, ClassifierStageParams>;
using FittedStage = std::variant<StringIndexModel, ImputerModel, VectorAssembler, VectorIndexModel,
                                 MinMaxModel, ClassifierStage>;

struct PipelineSpec {
  std::vector<StageSpec> stages;

  // Copy of this spec with a classifier stage appended (replacing an existing one).
  PipelineSpec with_classifier(const ClassifierParams& params, const std::string& features = "features",
                               const std::string& label = "label") const;
};

class FittedPipeline {
 public:
  FittedPipeline() = default;
  FittedPipeline(std::vector<FittedStage> stages, std::vector<std::string> feature_names);

  const std::vector<FittedStage>& stages() const noexcept { return stages_; }
  // Source column for each dimension of the classifier's feature vector
  // (empty when there is no classifier stage).
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  const ClassifierStage* classifier() const;

  DataTable transform(const DataTable& table) const;

 private:
  std::vector<FittedStage> stages_;
  std::vector<std::string> feature_names_;
};

// Fits each estimator on the cumulative transformed table, in order. Column
// references are checked before any fitting; errors name the stage index.
FittedPipeline pipeline_fit(const PipelineSpec& spec, const DataTable& table, unsigned threads = 1);
inline DataTable pipeline_transform(const FittedPipeline& fitted, const DataTable& table) {
  return fitted.transform(table);
}

// Index the six categorical columns (keep), impute BusinessYear, assemble,
// vector-index (skip), min-max scale, then wrap the scaled vector as
// "features": seven dimensions in total.
PipelineSpec default_benefits_pipeline();
// Index every text column, impute every numeric column, and then follow the
// same assemble / vector-index / scale / wrap chain. Columns in `exclude`
// (typically the label source) are left out.
PipelineSpec pipeline_for_schema(const std::vector<ColumnSpec>& schema, const std::string& label_col = "label",
                                 const std::vector<std::string>& exclude = {});

nlohmann::json pipeline_spec_to_json(const PipelineSpec& spec);
PipelineSpec pipeline_spec_from_json(const nlohmann::json& j);
nlohmann::json fitted_pipeline_to_json(const FittedPipeline& fitted);
FittedPipeline fitted_pipeline_from_json(const nlohmann::json& j);

}  // namespace benefitml
