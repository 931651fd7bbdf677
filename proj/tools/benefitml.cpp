#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "benefitml/csv.hpp"
#include "benefitml/data_ops.hpp"
#include "benefitml/error.hpp"
#include "benefitml/evaluation.hpp"
#include "benefitml/feature_vector.hpp"
#include "benefitml/model_file.hpp"
#include "benefitml/model_selection.hpp"
#include "benefitml/parallel.hpp"
#include "benefitml/pipeline.hpp"
#include "benefitml/synth.hpp"
#include "benefitml/table_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace benefitml;

namespace {

const std::vector<std::string> kFamilyTags{"lr", "dt", "rf", "fm", "gbt", "svm"};

struct Common {
  std::uint64_t seed = 1;
  unsigned threads = default_threads();
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--seed", common.seed, "Master seed for every random choice")->capture_default_str();
  cmd->add_option("--threads", common.threads, "Worker thread cap")->check(CLI::PositiveNumber);
}

void require_file(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw std::runtime_error(what + " '" + path + "' does not exist");
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::string summarize(const DataTable& t) {
  std::ostringstream out;
  out << "rows: " << t.row_count() << "\ncolumns: " << t.column_count() << '\n';
  std::size_t width = 6;
  for (const auto& c : t.schema()) width = std::max(width, c.name.size());
  out << "column" << std::string(width - 6, ' ') << "  kind              nulls\n";
  for (std::size_t i = 0; i < t.column_count(); ++i) {
    const auto& col = t.column(i);
    const std::string kind(to_string(col.spec.kind));
    out << col.spec.name << std::string(width - col.spec.name.size(), ' ') << "  " << kind
        << std::string(kind.size() < 18 ? 18 - kind.size() : 1, ' ') << col.null_count() << '\n';
  }
  if (const auto label = t.label_column()) {
    std::size_t pos = 0;
    for (const auto& v : t.labels(*label)) pos += v.value_or(0) == 1;
    out << "positive rate: " << format_double(static_cast<double>(pos) / static_cast<double>(t.row_count())) << '\n';
  }
  return out.str();
}

bool has_all(const DataTable& t, std::initializer_list<const char*> names) {
  return std::all_of(names.begin(), names.end(), [&](const char* n) { return t.has_column(n); });
}

PipelineSpec choose_pipeline(const std::string& path, const DataTable& t, const std::vector<std::string>& exclude) {
  if (!path.empty()) {
    require_file(path, "pipeline file");
    return pipeline_spec_from_json(load_json(path));
  }
  if (has_all(t, {"StateCode", "SourceName", "IssuerId", "QuantLimitOnSvc", "Exclusions", "IsEHB", "BusinessYear"}))
    return default_benefits_pipeline();
  return pipeline_for_schema(t.schema(), kLabelColumn, exclude);
}

// ---- ingest ----------------------------------------------------------------

struct IngestArgs {
  std::string input, schema, out, label_source = kDefaultLabelSource, delimiter = ",";
  std::vector<std::string> positives{kDefaultPositiveValue};
  bool no_label = false;
};

int run_ingest(const IngestArgs& a) {
  require_file(a.input, "input file");
  require_file(a.schema, "schema file");
  if (a.delimiter.size() != 1) throw std::invalid_argument("--delimiter must be a single character");
  const auto schema = load_schema(a.schema);
  CsvOptions opts;
  opts.delimiter = a.delimiter[0];
  auto table = read_csv(a.input, schema, opts);
  const bool has_label = table.label_column().has_value();
  if (!a.no_label && !has_label && table.has_column(a.label_source))
    table = derive_label(table, a.label_source, {a.positives.begin(), a.positives.end()});
  ensure_parent(a.out);
  save_table(table, a.out);
  std::cout << summarize(table) << "fingerprint: " << fingerprint_hex(table) << "\nwrote " << a.out << '\n';
  return 0;
}

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string kind = "benefits", spec, out, schema_out;
  std::size_t rows = 0;
  double positive_rate = -1.0;
};

int run_synth(const SynthArgs& a, const Common& c, bool seed_given) {
  SynthSpec spec;
  if (!a.spec.empty()) {
    require_file(a.spec, "synth spec file");
    spec = synth_spec_from_json(load_json(a.spec));
    if (seed_given) spec.seed = c.seed;
  } else if (a.kind == "benefits") {
    spec = default_benefits_spec(10000, 0.81, c.seed);
  } else {
    spec = default_interaction_spec(4000, c.seed);
  }
  if (a.rows > 0) spec.row_count = a.rows;
  if (a.positive_rate >= 0.0) spec.positive_rate = a.positive_rate;
  spec.validate();
  const auto table = generate_synthetic(spec);
  ensure_parent(a.out);
  write_csv(table, fs::path(a.out));
  const fs::path schema_path = a.schema_out.empty() ? fs::path(a.out).replace_extension(".schema.json") : fs::path(a.schema_out);
  ensure_parent(schema_path);
  save_json(schema_to_json(synthetic_schema(spec)), schema_path);
  std::cout << "rows: " << table.row_count() << "\nwrote " << a.out << "\nschema " << schema_path.string() << '\n';
  return 0;
}

// ---- sample / split --------------------------------------------------------

int run_sample(const std::string& data, double fraction, const std::string& out, const Common& c) {
  require_file(data, "data file");
  const auto table = sample_rows(load_table(data), fraction, c.seed);
  ensure_parent(out);
  save_table(table, out);
  std::cout << "rows: " << table.row_count() << "\nwrote " << out << '\n';
  return 0;
}

int run_split(const std::string& data, double fraction, const std::string& out, const Common& c) {
  require_file(data, "data file");
  const auto split = train_test_split(load_table(data), fraction, c.seed);
  fs::create_directories(out);
  save_table(split.train, fs::path(out) / "train.tbl");
  save_table(split.test, fs::path(out) / "test.tbl");
  std::cout << "train rows: " << split.train.row_count() << "\ntest rows: " << split.test.row_count() << "\nwrote "
            << (fs::path(out) / "train.tbl").string() << ", " << (fs::path(out) / "test.tbl").string() << '\n';
  return 0;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  std::string data, pipeline, model, grid, out, metric = "auc_roc";
  std::vector<std::string> exclude{kDefaultLabelSource};
  int folds = 3;
  double test_fraction = 0.3;
};

int run_train(const TrainArgs& a, const Common& c) {
  require_file(a.data, "data file");
  const auto table = load_table(a.data);
  if (!table.has_column(kLabelColumn)) throw SchemaError("data has no 'label' column; ingest with a label source");
  const auto family = family_from_tag(a.model);
  const auto spec = choose_pipeline(a.pipeline, table, a.exclude);

  ParamGrid grid = default_grid(family);
  if (!a.grid.empty()) {
    require_file(a.grid, "grid file");
    grid.axes = load_axes(a.grid);
  }
  const auto& names = parameter_names(family);
  if (std::find(names.begin(), names.end(), "seed") != names.end()) grid.base.seed = derive_seed(c.seed, 3);

  std::vector<std::size_t> train_idx(table.row_count());
  std::iota(train_idx.begin(), train_idx.end(), std::size_t{0});
  if (a.test_fraction > 0.0) train_idx = split_indices(table.row_count(), a.test_fraction, c.seed).first;
  const auto train = table.select_rows(train_idx);

  CVConfig cfg;
  cfg.folds = a.folds;
  cfg.metric = cv_metric_from_string(a.metric);
  cfg.seed = derive_seed(c.seed, 1);
  cfg.threads = c.threads;
  const auto cv = cross_validate(spec, grid, train, cfg);

  ModelFile file;
  file.pipeline = cv.model;
  file.metadata = {{"seed", c.seed},
                   {"data_fingerprint", fingerprint_hex(table)},
                   {"train_fingerprint", fingerprint_hex(train)},
                   {"test_fraction", a.test_fraction},
                   {"train_rows", train.row_count()},
                   {"cv", {{"folds", cfg.folds},
                           {"metric", to_string(cfg.metric)},
                           {"grid", json::parse(axes_to_json(grid.axes).dump())},
                           {"best_index", cv.best_index},
                           {"best_mean_metric", cv.best().mean_metric}}}};
  ensure_parent(a.out);
  save_model(file, a.out);

  std::cout << "model: " << family_tag(family) << "\ntrain rows: " << train.row_count() << "\ngrid cells: "
            << cv.cells.size() << '\n';
  for (std::size_t i = 0; i < cv.cells.size(); ++i) {
    const auto& cell = cv.cells[i];
    std::cout << "  cell " << i + 1 << ' ' << cell.param_map.dump() << ' ';
    if (cell.ok())
      std::cout << to_string(cfg.metric) << '=' << format_double(cell.mean_metric) << '\n';
    else
      std::cout << "FAILED: " << *cell.error << '\n';
  }
  std::cout << "best params: " << cv.best().param_map.dump() << "\nbest " << to_string(cfg.metric) << ": "
            << format_double(cv.best().mean_metric) << "\nfit_minutes: " << format_double(cv.fit_minutes)
            << "\nwrote " << a.out << '\n';
  return 0;
}

// ---- evaluate / predict ----------------------------------------------------

DataTable project(const DataTable& t, std::initializer_list<const char*> names) {
  std::vector<Column> cols;
  for (const char* n : names)
    if (t.has_column(n)) cols.push_back(t.column(n));
  return DataTable(std::move(cols));
}

struct EvaluateArgs {
  std::string model, data, out, predictions, curves;
  bool all_rows = false;
};

int run_evaluate(const EvaluateArgs& a) {
  require_file(a.model, "model file");
  require_file(a.data, "data file");
  const auto file = load_model(a.model);
  auto table = load_table(a.data);
  const auto fp = fingerprint_hex(table);
  const auto& meta = file.metadata;
  const double test_fraction = meta.value("test_fraction", 0.0);
  std::string evaluated_on = "all rows";
  bool in_sample = fp == meta.value("train_fingerprint", std::string());
  if (fp == meta.value("data_fingerprint", std::string())) {
    if (test_fraction > 0.0 && !a.all_rows) {
      const auto test_idx =
          split_indices(table.row_count(), test_fraction, meta.at("seed").get<std::uint64_t>()).second;
      table = table.select_rows(test_idx);
      evaluated_on = "held-out split";
    } else {
      in_sample = true;
    }
  }
  if (!table.has_column(kLabelColumn)) throw SchemaError("data has no 'label' column to evaluate against");
  const auto scored = file.pipeline.transform(table);
  auto report = evaluate(scored_rows(scored));
  report.metadata = {{"model", family_tag(file.model().family())},
                     {"data_fingerprint", fp},
                     {"evaluated_on", evaluated_on},
                     {"rows", scored.row_count()},
                     {"in_sample", in_sample}};

  std::cout << render_confusion_table(report);
  std::cout << "F1: " << format_double(report.metrics.f1) << "\nAccuracy: " << format_double(report.metrics.accuracy)
            << "\nAUC ROC: " << (report.auc_roc ? format_double(*report.auc_roc) : "n/a")
            << "\nAUC PR: " << (report.auc_pr ? format_double(*report.auc_pr) : "n/a") << "\nrows: " << scored.row_count()
            << " (" << evaluated_on << ")\n";
  if (in_sample) std::cout << "warning: in-sample evaluation (data overlaps the training rows)\n";
  if (!a.out.empty()) {
    ensure_parent(a.out);
    save_json(report_to_json(report), a.out);
  }
  if (!a.predictions.empty()) {
    ensure_parent(a.predictions);
    const auto& features = file.pipeline.classifier()->features;
    std::vector<Column> cols{scored.column(features), scored.column(kPredictionColumn), scored.column(kTrueLabelColumn)};
    write_csv(DataTable(std::move(cols)), fs::path(a.predictions));
  }
  if (!a.curves.empty()) {
    fs::create_directories(a.curves);
    write_curve_csv(report.roc_points, "fpr", "tpr", fs::path(a.curves) / "roc.csv");
    write_curve_csv(report.pr_points, "recall", "precision", fs::path(a.curves) / "pr.csv");
  }
  return 0;
}

int run_predict(const std::string& model, const std::string& data, const std::string& out) {
  require_file(model, "model file");
  require_file(data, "data file");
  const auto file = load_model(model);
  const auto scored = file.pipeline.transform(load_table(data));
  const auto& features = file.pipeline.classifier()->features;
  std::vector<Column> cols{scored.column(features), scored.column(kRawScoreColumn),
                           scored.column(kProbabilityColumn), scored.column(kPredictionColumn)};
  if (scored.has_column(kTrueLabelColumn)) cols.push_back(scored.column(kTrueLabelColumn));
  const DataTable result(std::move(cols));
  if (out.empty()) {
    write_csv(result, std::cout);
  } else {
    ensure_parent(out);
    write_csv(result, fs::path(out));
    std::cout << "rows: " << result.row_count() << "\nwrote " << out << '\n';
  }
  return 0;
}

// ---- benchmark -------------------------------------------------------------

struct BenchmarkArgs {
  std::string data, pipeline, grid_dir, out, metric = "auc_roc";
  std::vector<std::string> models = kFamilyTags;
  std::vector<std::string> exclude{kDefaultLabelSource};
  int folds = 3;
  double test_fraction = 0.3;
};

int run_benchmark(const BenchmarkArgs& a, const Common& c) {
  require_file(a.data, "data file");
  const auto table = load_table(a.data);
  if (!table.has_column(kLabelColumn)) throw SchemaError("data has no 'label' column; ingest with a label source");
  const auto spec = choose_pipeline(a.pipeline, table, a.exclude);
  const auto split = train_test_split(table, a.test_fraction, c.seed);

  std::vector<ParamGrid> grids;
  for (const auto& tag : a.models) {
    const auto family = family_from_tag(tag);
    auto grid = default_grid(family);
    if (!a.grid_dir.empty()) {
      const auto path = fs::path(a.grid_dir) / (tag + ".json");
      if (fs::exists(path)) grid.axes = load_axes(path.string());
    }
    const auto& names = parameter_names(family);
    if (std::find(names.begin(), names.end(), "seed") != names.end()) grid.base.seed = derive_seed(c.seed, 3);
    grids.push_back(std::move(grid));
  }
  CVConfig cfg;
  cfg.folds = a.folds;
  cfg.metric = cv_metric_from_string(a.metric);
  cfg.seed = derive_seed(c.seed, 1);
  cfg.threads = c.threads;
  const auto report = benchmark(split.train, split.test, spec, grids, cfg);
  const auto text = render_benchmark_table(report);
  std::cout << text;
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    save_json(benchmark_to_json(report), fs::path(a.out) / "benchmark.json");
    std::ofstream(fs::path(a.out) / "benchmark.txt") << text;
  }
  return report.any_failed() ? 1 : 0;
}

// ---- importance ------------------------------------------------------------

int run_importance(const std::string& model, const std::string& out) {
  require_file(model, "model file");
  const auto file = load_model(model);
  const auto& m = file.model();
  if (m.family() != Family::DT && m.family() != Family::RF && m.family() != Family::GBT)
    throw std::invalid_argument("feature importances are available for dt, rf and gbt models only (this model is " +
                                std::string(family_tag(m.family())) + ")");
  const auto w = feature_importances(m);
  auto names = file.pipeline.feature_names();
  if (names.size() != w.size()) {
    names.clear();
    for (std::size_t i = 0; i < w.size(); ++i) names.push_back("f" + std::to_string(i));
  }
  std::vector<std::size_t> order(w.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return w[x] > w[y]; });

  std::size_t width = 10;
  for (const auto& n : names) width = std::max(width, n.size());
  std::cout << "Ranking  df columns" << std::string(width - 10, ' ') << "  Importance value\n";
  json rows = json::array();
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto& n = names[order[r]];
    const auto rank = std::to_string(r + 1);
    std::cout << rank << std::string(9 - std::min<std::size_t>(8, rank.size()), ' ') << n
              << std::string(width - n.size(), ' ') << "  " << format_double(w[order[r]]) << '\n';
    rows.push_back({{"rank", r + 1}, {"column", n}, {"importance", w[order[r]]}});
  }
  if (!out.empty()) {
    ensure_parent(out);
    save_json(json{{"model", family_tag(m.family())}, {"importances", rows}}, out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular binary-classification pipeline: ingest, train, evaluate, benchmark"};
  app.require_subcommand(1);
  Common common;

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Read a CSV with a schema into a table snapshot");
  ingest_cmd->add_option("--input", ingest.input, "CSV file")->required();
  ingest_cmd->add_option("--schema", ingest.schema, "Schema JSON")->required();
  ingest_cmd->add_option("--out", ingest.out, "Snapshot path")->required();
  ingest_cmd->add_option("--label-source", ingest.label_source, "Column the label is derived from")->capture_default_str();
  ingest_cmd->add_option("--positive", ingest.positives, "Label-source values meaning 1")->capture_default_str();
  ingest_cmd->add_option("--delimiter", ingest.delimiter, "Field delimiter")->capture_default_str();
  ingest_cmd->add_flag("--no-label", ingest.no_label, "Do not derive a label column");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic benefits CSV and its schema");
  synth_cmd->add_option("--kind", synth.kind, "benefits or interaction")
      ->check(CLI::IsMember({"benefits", "interaction"}))
      ->capture_default_str();
  synth_cmd->add_option("--spec", synth.spec, "Generator spec JSON (overrides --kind)");
  synth_cmd->add_option("--rows", synth.rows, "Row count");
  synth_cmd->add_option("--positive-rate", synth.positive_rate, "Share of positive labels");
  synth_cmd->add_option("--out", synth.out, "CSV path")->required();
  synth_cmd->add_option("--schema-out", synth.schema_out, "Schema path (default: the CSV path with extension .schema.json)");
  add_common(synth_cmd, common);

  std::string sample_data, sample_out;
  double sample_fraction = 0.1;
  auto* sample_cmd = app.add_subcommand("sample", "Draw a seeded row sample without replacement");
  sample_cmd->add_option("--data", sample_data, "Table snapshot")->required();
  sample_cmd->add_option("--fraction", sample_fraction, "Fraction of rows to keep")->required();
  sample_cmd->add_option("--out", sample_out, "Snapshot path")->required();
  add_common(sample_cmd, common);

  std::string split_data, split_out;
  double split_fraction = 0.3;
  auto* split_cmd = app.add_subcommand("split", "Seeded train/test split into <out>/train.tbl and <out>/test.tbl");
  split_cmd->add_option("--data", split_data, "Table snapshot")->required();
  split_cmd->add_option("--test-fraction", split_fraction, "Held-out fraction")->capture_default_str();
  split_cmd->add_option("--out", split_out, "Output directory")->required();
  add_common(split_cmd, common);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Split, cross-validate a grid, refit the best cell and save it");
  train_cmd->add_option("--data", train.data, "Table snapshot")->required();
  train_cmd->add_option("--pipeline", train.pipeline, "Pipeline spec JSON");
  train_cmd->add_option("--model", train.model, "Model family")->required()->check(CLI::IsMember(kFamilyTags));
  train_cmd->add_option("--grid", train.grid, "Grid JSON, e.g. {\"maxDepth\": [3, 5]}");
  train_cmd->add_option("--folds", train.folds, "Cross-validation folds")->capture_default_str();
  train_cmd->add_option("--metric", train.metric, "auc_roc or auc_pr")
      ->check(CLI::IsMember({"auc_roc", "auc_pr"}))
      ->capture_default_str();
  train_cmd->add_option("--test-fraction", train.test_fraction, "Held-out fraction; 0 trains on every row")
      ->capture_default_str();
  train_cmd->add_option("--exclude", train.exclude, "Columns kept out of a generated pipeline")->capture_default_str();
  train_cmd->add_option("--out", train.out, "Model file")->required();
  add_common(train_cmd, common);

  EvaluateArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a labelled table and report metrics");
  eval_cmd->add_option("--model", eval.model, "Model file")->required();
  eval_cmd->add_option("--data", eval.data, "Table snapshot")->required();
  eval_cmd->add_option("--out", eval.out, "Report JSON");
  eval_cmd->add_option("--predictions", eval.predictions, "CSV with features, prediction, trueLabel");
  eval_cmd->add_option("--curves", eval.curves, "Directory for roc.csv and pr.csv");
  eval_cmd->add_flag("--all-rows", eval.all_rows, "Score every row even when the table is the training input");

  std::string predict_model, predict_data, predict_out;
  auto* predict_cmd = app.add_subcommand("predict", "Score a table with a saved model");
  predict_cmd->add_option("--model", predict_model, "Model file")->required();
  predict_cmd->add_option("--data", predict_data, "Table snapshot")->required();
  predict_cmd->add_option("--out", predict_out, "CSV path (default: standard output)");

  BenchmarkArgs bench;
  auto* bench_cmd = app.add_subcommand("benchmark", "Cross-validate and evaluate several model families");
  bench_cmd->add_option("--data", bench.data, "Table snapshot")->required();
  bench_cmd->add_option("--pipeline", bench.pipeline, "Pipeline spec JSON");
  bench_cmd->add_option("--models", bench.models, "Families in report order")
      ->delimiter(',')
      ->check(CLI::IsMember(kFamilyTags))
      ->capture_default_str();
  bench_cmd->add_option("--grid-dir", bench.grid_dir, "Directory of <family>.json grids");
  bench_cmd->add_option("--folds", bench.folds, "Cross-validation folds")->capture_default_str();
  bench_cmd->add_option("--metric", bench.metric, "auc_roc or auc_pr")
      ->check(CLI::IsMember({"auc_roc", "auc_pr"}))
      ->capture_default_str();
  bench_cmd->add_option("--test-fraction", bench.test_fraction, "Held-out fraction")->capture_default_str();
  bench_cmd->add_option("--exclude", bench.exclude, "Columns kept out of a generated pipeline")->capture_default_str();
  bench_cmd->add_option("--out", bench.out, "Directory for benchmark.json and benchmark.txt");
  add_common(bench_cmd, common);

  std::string imp_model, imp_out;
  auto* imp_cmd = app.add_subcommand("importance", "Rank features by importance (dt, rf, gbt)");
  imp_cmd->add_option("--model", imp_model, "Model file")->required();
  imp_cmd->add_option("--out", imp_out, "Ranking JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*ingest_cmd) return run_ingest(ingest);
    if (*synth_cmd) return run_synth(synth, common, synth_cmd->count("--seed") > 0);
    if (*sample_cmd) return run_sample(sample_data, sample_fraction, sample_out, common);
    if (*split_cmd) return run_split(split_data, split_fraction, split_out, common);
    if (*train_cmd) return run_train(train, common);
    if (*eval_cmd) return run_evaluate(eval);
    if (*predict_cmd) return run_predict(predict_model, predict_data, predict_out);
    if (*bench_cmd) return run_benchmark(bench, common);
    if (*imp_cmd) return run_importance(imp_model, imp_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
