#include "benefitml/pipeline.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "benefitml/dataset.hpp"
#include "benefitml/error.hpp"

namespace benefitml {

using nlohmann::json;

DataTable ClassifierStage::transform(const DataTable& table) const {
  const auto& feats = table.vectors(features);
  for (const char* name : {kRawScoreColumn, kProbabilityColumn, kPredictionColumn})
    if (table.has_column(name)) throw SchemaError(std::string("output column '") + name + "' already exists");
  NumericCells raw, prob, pred;
  raw.reserve(feats.size());
  prob.reserve(feats.size());
  pred.reserve(feats.size());
  for (std::size_t r = 0; r < feats.size(); ++r) {
    if (!feats[r]) throw DataError("null feature vector at row " + std::to_string(r + 1));
    const Prediction p = predict(model, *feats[r]);
    raw.emplace_back(p.raw_score);
    prob.emplace_back(p.probability);
    pred.emplace_back(static_cast<double>(p.label));
  }
  DataTable out = table.with_column(Column{{kRawScoreColumn, ColumnKind::numeric, false}, std::move(raw)})
                      .with_column(Column{{kProbabilityColumn, ColumnKind::numeric, true}, std::move(prob)})
                      .with_column(Column{{kPredictionColumn, ColumnKind::numeric, false}, std::move(pred)});
  if (table.has_column(label) && !table.has_column(kTrueLabelColumn)) {
    const Column& lab = table.column(label);
    NumericCells truth;
    truth.reserve(table.row_count());
    if (const auto* l = std::get_if<LabelCells>(&lab.cells)) {
      for (const auto& v : *l) truth.emplace_back(v ? std::optional<double>(*v) : std::nullopt);
    } else if (const auto* n = std::get_if<NumericCells>(&lab.cells)) {
      truth = *n;
    }
    if (!truth.empty() || table.row_count() == 0)
      out = out.with_column(Column{{kTrueLabelColumn, ColumnKind::numeric, true}, std::move(truth)});
  }
  return out;
}

PipelineSpec PipelineSpec::with_classifier(const ClassifierParams& params, const std::string& features,
                                           const std::string& label) const {
  PipelineSpec out;
  for (const auto& s : stages)
    if (!std::holds_alternative<ClassifierStageParams>(s)) out.stages.push_back(s);
  out.stages.push_back(ClassifierStageParams{features, label, params});
  return out;
}

FittedPipeline::FittedPipeline(std::vector<FittedStage> stages, std::vector<std::string> feature_names)
    : stages_(std::move(stages)), feature_names_(std::move(feature_names)) {}

const ClassifierStage* FittedPipeline::classifier() const {
  for (const auto& s : stages_)
    if (const auto* c = std::get_if<ClassifierStage>(&s)) return c;
  return nullptr;
}

DataTable FittedPipeline::transform(const DataTable& table) const {
  DataTable current = table;
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    try {
      current = std::visit([&](const auto& stage) { return stage.transform(current); }, stages_[i]);
    } catch (const SchemaError& e) {
      throw SchemaError("stage " + std::to_string(i) + ": " + e.what());
    }
  }
  return current;
}

namespace {

std::string stage_type(const StageSpec& s) {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, StringIndexerParams>) return "string_indexer";
        else if constexpr (std::is_same_v<T, ImputerParams>) return "imputer";
        else if constexpr (std::is_same_v<T, VectorAssembler>) return "vector_assembler";
        else if constexpr (std::is_same_v<T, VectorIndexerParams>) return "vector_indexer";
        else if constexpr (std::is_same_v<T, MinMaxParams>) return "min_max_scaler";
        else return "classifier";
      },
      s);
}

// Walks the stage list against the table schema without fitting anything,
// tracking which source column feeds each vector dimension.
class SchemaTracer {
 public:
  explicit SchemaTracer(const DataTable& table) {
    for (std::size_t c = 0; c < table.column_count(); ++c) {
      const Column& col = table.column(c);
      kinds_[col.spec.name] = col.spec.kind;
      if (col.spec.kind == ColumnKind::vector) {
        const auto& cells = std::get<VectorCells>(col.cells);
        std::size_t size = cells.empty() || !cells[0] ? 0 : cells[0]->size();
        for (std::size_t k = 0; k < size; ++k) names_[col.spec.name].push_back(col.spec.name + "[" + std::to_string(k) + "]");
      } else {
        names_[col.spec.name] = {col.spec.name};
      }
    }
  }

  void visit(std::size_t index, const StageSpec& stage) {
    index_ = index;
    type_ = stage_type(stage);
    std::visit([this](const auto& p) { trace(p); }, stage);
  }

  const std::vector<std::string>& features() const { return features_; }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw SchemaError("stage " + std::to_string(index_) + " (" + type_ + "): " + what);
  }

  void need(const std::string& col, std::initializer_list<ColumnKind> kinds) const {
    auto it = kinds_.find(col);
    if (it == kinds_.end()) fail("missing column '" + col + "'");
    for (ColumnKind k : kinds)
      if (it->second == k) return;
    fail("column '" + col + "' has kind " + std::string(to_string(it->second)));
  }

  void add(const std::string& col, ColumnKind kind, std::vector<std::string> names) {
    if (kinds_.count(col)) fail("output column '" + col + "' already exists");
    kinds_[col] = kind;
    names_[col] = std::move(names);
  }

  void trace(const StringIndexerParams& p) {
    need(p.input, {ColumnKind::categorical_text});
    add(p.output, ColumnKind::numeric, names_[p.input]);
  }
  void trace(const ImputerParams& p) {
    if (p.inputs.size() != p.outputs.size()) fail("inputs and outputs differ in length");
    for (std::size_t i = 0; i < p.inputs.size(); ++i) {
      need(p.inputs[i], {ColumnKind::numeric});
      add(p.outputs[i], ColumnKind::numeric, names_[p.inputs[i]]);
    }
  }
  void trace(const VectorAssembler& p) {
    if (p.inputs.empty()) fail("no input columns");
    std::vector<std::string> names;
    for (const auto& in : p.inputs) {
      need(in, {ColumnKind::numeric, ColumnKind::boolean, ColumnKind::label, ColumnKind::vector});
      names.insert(names.end(), names_[in].begin(), names_[in].end());
    }
    add(p.output, ColumnKind::vector, std::move(names));
  }
  void trace(const VectorIndexerParams& p) {
    need(p.input, {ColumnKind::vector});
    add(p.output, ColumnKind::vector, names_[p.input]);
  }
  void trace(const MinMaxParams& p) {
    need(p.input, {ColumnKind::vector});
    add(p.output, ColumnKind::vector, names_[p.input]);
  }
  void trace(const ClassifierStageParams& p) {
    need(p.features, {ColumnKind::vector});
    need(p.label, {ColumnKind::label, ColumnKind::numeric});
    features_ = names_[p.features];
    for (const char* c : {kRawScoreColumn, kProbabilityColumn, kPredictionColumn})
      add(c, ColumnKind::numeric, {});
  }

  std::map<std::string, ColumnKind> kinds_;
  std::map<std::string, std::vector<std::string>> names_;
  std::vector<std::string> features_;
  std::size_t index_ = 0;
  std::string type_;
};

}  // namespace

FittedPipeline pipeline_fit(const PipelineSpec& spec, const DataTable& table, unsigned threads) {
  SchemaTracer tracer(table);
  for (std::size_t i = 0; i < spec.stages.size(); ++i) tracer.visit(i, spec.stages[i]);

  std::vector<FittedStage> fitted;
  DataTable current = table;
  for (std::size_t i = 0; i < spec.stages.size(); ++i) {
    FittedStage stage = std::visit(
        [&](const auto& p) -> FittedStage {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, StringIndexerParams>) return string_indexer_fit(current, p);
          else if constexpr (std::is_same_v<T, ImputerParams>) return imputer_fit(current, p);
          else if constexpr (std::is_same_v<T, VectorAssembler>) return p;
          else if constexpr (std::is_same_v<T, VectorIndexerParams>) return vector_indexer_fit(current, p);
          else if constexpr (std::is_same_v<T, MinMaxParams>) return minmax_fit(current, p);
          else {
            const Dataset data = dataset_from_table(current, p.features, p.label);
            return ClassifierStage{p.features, p.label, train(data, p.params, threads)};
          }
        },
        spec.stages[i]);
    // The last stage's output is never consumed during fitting.
    if (i + 1 < spec.stages.size())
      current = std::visit([&](const auto& s) { return s.transform(current); }, stage);
    fitted.push_back(std::move(stage));
  }
  std::vector<std::string> names;
  for (const auto& s : fitted) {
    // Traced names only line up when every vector had a known width.
    if (const auto* c = std::get_if<ClassifierStage>(&s); c && tracer.features().size() == c->model.num_features)
      names = tracer.features();
  }
  return FittedPipeline(std::move(fitted), std::move(names));
}

PipelineSpec default_benefits_pipeline() {
  PipelineSpec spec;
  const std::vector<std::pair<std::string, std::string>> categorical{
      {"StateCode", "SC"}, {"SourceName", "SN"}, {"IssuerId", "II"},
      {"QuantLimitOnSvc", "QL"}, {"Exclusions", "EX"}, {"IsEHB", "EHB"}};
  std::vector<std::string> assembled;
  for (const auto& [in, out] : categorical) {
    spec.stages.push_back(StringIndexerParams{in, out, InvalidPolicy::keep});
    assembled.push_back(out);
  }
  spec.stages.push_back(ImputerParams{{"BusinessYear"}, {"BY"}});
  assembled.push_back("BY");
  spec.stages.push_back(VectorAssembler{assembled, "catFeatures"});
  spec.stages.push_back(VectorIndexerParams{"catFeatures", "IdxCatFeatures", 20, InvalidPolicy::skip});
  spec.stages.push_back(MinMaxParams{"IdxCatFeatures", "normFeatures", 0.0, 1.0});
  spec.stages.push_back(VectorAssembler{{"normFeatures"}, "features"});
  return spec;
}

PipelineSpec pipeline_for_schema(const std::vector<ColumnSpec>& schema, const std::string& label_col,
                                 const std::vector<std::string>& exclude) {
  PipelineSpec spec;
  std::vector<std::string> assembled;
  ImputerParams imputer;
  for (const auto& c : schema) {
    if (c.name == label_col || c.kind == ColumnKind::label) continue;
    if (std::find(exclude.begin(), exclude.end(), c.name) != exclude.end()) continue;
    if (c.kind == ColumnKind::categorical_text) {
      spec.stages.push_back(StringIndexerParams{c.name, c.name + "_idx", InvalidPolicy::keep});
      assembled.push_back(c.name + "_idx");
    } else if (c.kind == ColumnKind::numeric) {
      imputer.inputs.push_back(c.name);
      imputer.outputs.push_back(c.name + "_imp");
      assembled.push_back(c.name + "_imp");
    } else if (c.kind == ColumnKind::boolean || c.kind == ColumnKind::vector) {
      assembled.push_back(c.name);
    }
  }
  if (!imputer.inputs.empty()) spec.stages.push_back(imputer);
  if (assembled.empty()) throw SchemaError("schema has no usable feature columns");
  spec.stages.push_back(VectorAssembler{assembled, "catFeatures"});
  spec.stages.push_back(VectorIndexerParams{"catFeatures", "IdxCatFeatures", 20, InvalidPolicy::skip});
  spec.stages.push_back(MinMaxParams{"IdxCatFeatures", "normFeatures", 0.0, 1.0});
  spec.stages.push_back(VectorAssembler{{"normFeatures"}, "features"});
  return spec;
}

json pipeline_spec_to_json(const PipelineSpec& spec) {
  json stages = json::array();
  for (const auto& s : spec.stages) {
    stages.push_back(std::visit(
        [](const auto& p) -> json {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, ClassifierStageParams>)
            return {{"type", "classifier"}, {"features", p.features}, {"label", p.label},
                    {"params", params_to_json(p.params)}};
          else
            return to_json(p);
        },
        s));
  }
  return json{{"stages", stages}};
}

namespace {

StageSpec stage_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "string_indexer") return string_indexer_params_from_json(j);
  if (type == "imputer") return imputer_params_from_json(j);
  if (type == "vector_assembler") return vector_assembler_from_json(j);
  if (type == "vector_indexer") return vector_indexer_params_from_json(j);
  if (type == "min_max_scaler") return minmax_params_from_json(j);
  if (type == "classifier")
    return ClassifierStageParams{j.value("features", "features"), j.value("label", "label"),
                                 params_from_json(j.at("params"))};
  throw ParseError("unknown pipeline stage type '" + type + "'");
}

}  // namespace

PipelineSpec pipeline_spec_from_json(const json& j) {
  PipelineSpec spec;
  try {
    const json& stages = j.is_array() ? j : j.at("stages");
    for (std::size_t i = 0; i < stages.size(); ++i) {
      try {
        spec.stages.push_back(stage_from_json(stages[i]));
      } catch (const json::exception& e) {
        throw ParseError("pipeline stage " + std::to_string(i) + ": " + e.what());
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("pipeline spec: ") + e.what());
  }
  return spec;
}

json fitted_pipeline_to_json(const FittedPipeline& fitted) {
  json stages = json::array();
  for (const auto& s : fitted.stages()) {
    stages.push_back(std::visit(
        [](const auto& st) -> json {
          using T = std::decay_t<decltype(st)>;
          if constexpr (std::is_same_v<T, ClassifierStage>)
            return {{"type", "classifier"}, {"features", st.features}, {"label", st.label},
                    {"model", model_to_json(st.model)}};
          else if constexpr (std::is_same_v<T, VectorAssembler>)
            return to_json(st);
          else
            return fitted_to_json(st);
        },
        s));
  }
  return json{{"stages", stages}, {"feature_names", fitted.feature_names()}};
}

FittedPipeline fitted_pipeline_from_json(const json& j) {
  std::vector<FittedStage> stages;
  for (const auto& s : j.at("stages")) {
    const std::string type = s.at("type").get<std::string>();
    if (type == "string_indexer") stages.emplace_back(string_index_model_from_json(s));
    else if (type == "imputer") stages.emplace_back(imputer_model_from_json(s));
    else if (type == "vector_assembler") stages.emplace_back(vector_assembler_from_json(s));
    else if (type == "vector_indexer") stages.emplace_back(vector_index_model_from_json(s));
    else if (type == "min_max_scaler") stages.emplace_back(minmax_model_from_json(s));
    else if (type == "classifier")
      stages.emplace_back(ClassifierStage{s.at("features").get<std::string>(), s.at("label").get<std::string>(),
                                          model_from_json(s.at("model"))});
    else throw FormatError("unknown fitted stage type '" + type + "'");
  }
  return FittedPipeline(std::move(stages), j.value("feature_names", std::vector<std::string>{}));
}

}  // namespace benefitml
