#include "benefitml/stages.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "benefitml/error.hpp"

namespace benefitml {

using nlohmann::json;

std::string_view to_string(InvalidPolicy policy) {
  switch (policy) {
    case InvalidPolicy::keep: return "keep";
    case InvalidPolicy::skip: return "skip";
    case InvalidPolicy::error: return "error";
  }
  return "?";
}

InvalidPolicy invalid_policy_from_string(std::string_view name) {
  if (name == "keep") return InvalidPolicy::keep;
  if (name == "skip") return InvalidPolicy::skip;
  if (name == "error") return InvalidPolicy::error;
  throw ParseError("unknown handleInvalid policy '" + std::string(name) + "'");
}

namespace {

void require_absent(const DataTable& table, const std::string& output) {
  if (table.has_column(output))
    throw SchemaError("output column '" + output + "' already exists");
}

// Applies a row filter (if any) before appending the new column.
DataTable append(const DataTable& table, const std::vector<std::size_t>& kept, bool dropped,
                 Column column) {
  if (!dropped) return table.with_column(std::move(column));
  return table.select_rows(kept).with_column(std::move(column));
}

const VectorCells& vector_input(const DataTable& table, const std::string& name) {
  const Column& col = table.column(name);
  if (col.spec.kind != ColumnKind::vector)
    throw SchemaError("column '" + name + "' is not a vector column");
  return std::get<VectorCells>(col.cells);
}

std::size_t constant_size(const VectorCells& cells, const std::string& name) {
  std::optional<std::size_t> size;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    if (!cells[r]) throw DataError("null vector in '" + name + "' at row " + std::to_string(r + 1));
    if (size && *size != cells[r]->size())
      throw DataError("vector column '" + name + "' has varying sizes (row " +
                      std::to_string(r + 1) + ")");
    size = cells[r]->size();
  }
  return size.value_or(0);
}

}  // namespace

// --- StringIndexer --------------------------------------------------------

StringIndexModel::StringIndexModel(StringIndexerParams params, std::vector<std::string> labels)
    : params_(std::move(params)), labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!lookup_.emplace(labels_[i], i).second)
      throw DataError("string index: duplicate label '" + labels_[i] + "'");
  }
}

std::optional<std::size_t> StringIndexModel::index_of(const std::string& label) const {
  auto it = lookup_.find(label);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

StringIndexModel string_indexer_fit(const DataTable& table, const StringIndexerParams& params) {
  const auto& cells = table.text(params.input);
  if (cells.empty()) throw DataError("cannot index empty column '" + params.input + "'");
  std::map<std::string, std::size_t> counts;
  for (const auto& v : cells) ++counts[v ? *v : kMissingToken];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  // counts is sorted by text, so a stable sort by count keeps ties ascending.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> labels;
  labels.reserve(ranked.size());
  for (auto& [text, count] : ranked) labels.push_back(text);
  return StringIndexModel(params, std::move(labels));
}

DataTable StringIndexModel::transform(const DataTable& table) const {
  const auto& cells = table.text(params_.input);
  require_absent(table, params_.output);
  NumericCells out;
  out.reserve(cells.size());
  std::vector<std::size_t> kept;
  bool dropped = false;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    const std::string text = cells[r] ? *cells[r] : kMissingToken;
    auto idx = index_of(text);
    if (!idx) {
      switch (params_.policy) {
        case InvalidPolicy::keep: idx = labels_.size(); break;
        case InvalidPolicy::skip: dropped = true; continue;
        case InvalidPolicy::error:
          throw DataError("string index '" + params_.input + "': unseen label \"" + text +
                          "\" at row " + std::to_string(r + 1));
      }
    }
    kept.push_back(r);
    out.emplace_back(static_cast<double>(*idx));
  }
  return append(table, kept, dropped, Column{{params_.output, ColumnKind::numeric, false}, std::move(out)});
}

// --- Imputer --------------------------------------------------------------

ImputerModel imputer_fit(const DataTable& table, const ImputerParams& params) {
  if (params.inputs.size() != params.outputs.size())
    throw SchemaError("imputer: inputs and outputs differ in length");
  ImputerModel model{params, {}};
  for (const auto& name : params.inputs) {
    const auto& cells = table.numeric(name);
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& v : cells) {
      if (v) {
        sum += *v;
        ++n;
      }
    }
    model.means.push_back(n ? sum / static_cast<double>(n) : 0.0);
  }
  return model;
}

DataTable ImputerModel::transform(const DataTable& table) const {
  DataTable out = table;
  for (std::size_t i = 0; i < params.inputs.size(); ++i) {
    const auto& cells = table.numeric(params.inputs[i]);
    require_absent(out, params.outputs[i]);
    NumericCells filled;
    filled.reserve(cells.size());
    for (const auto& v : cells) filled.emplace_back(v ? *v : means.at(i));
    out = out.with_column(Column{{params.outputs[i], ColumnKind::numeric, false}, std::move(filled)});
  }
  return out;
}

// --- VectorAssembler ------------------------------------------------------

DataTable VectorAssembler::transform(const DataTable& table) const {
  if (inputs.empty()) throw SchemaError("vector assembler needs at least one input");
  require_absent(table, output);
  std::vector<const Column*> cols;
  for (const auto& name : inputs) {
    const Column& c = table.column(name);
    if (c.spec.kind == ColumnKind::categorical_text)
      throw SchemaError("vector assembler input '" + name + "' is text; index it first");
    cols.push_back(&c);
  }
  VectorCells out;
  out.reserve(table.row_count());
  std::vector<double> row;
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    row.clear();
    for (const Column* c : cols) {
      if (c->is_null(r))
        throw DataError("vector assembler: null in column '" + c->spec.name + "' at row " +
                        std::to_string(r + 1));
      std::visit(
          [&](const auto& cells) {
            using T = std::decay_t<decltype(*cells[r])>;
            if constexpr (std::is_same_v<T, FeatureVector>) {
              for (std::size_t k = 0; k < cells[r]->size(); ++k) row.push_back((*cells[r])[k]);
            } else if constexpr (std::is_same_v<T, std::string>) {
              // rejected above
            } else {
              row.push_back(static_cast<double>(*cells[r]));
            }
          },
          c->cells);
    }
    out.emplace_back(FeatureVector::dense(row).compressed());
  }
  return table.with_column(Column{{output, ColumnKind::vector, false}, std::move(out)});
}

// --- VectorIndexer --------------------------------------------------------

VectorIndexModel::VectorIndexModel(VectorIndexerParams params, std::size_t size,
                                   std::vector<std::optional<std::vector<double>>> categories)
    : params_(std::move(params)), size_(size), categories_(std::move(categories)) {
  if (categories_.size() != size_) throw DataError("vector index: category map count != size");
}

VectorIndexModel vector_indexer_fit(const DataTable& table, const VectorIndexerParams& params) {
  if (params.max_categories < 1) throw std::invalid_argument("max_categories must be >= 1");
  const auto& cells = vector_input(table, params.input);
  const std::size_t size = constant_size(cells, params.input);
  std::vector<std::set<double>> distinct(size);
  std::vector<bool> overflow(size, false);
  for (const auto& v : cells) {
    for (std::size_t d = 0; d < size; ++d) {
      if (overflow[d]) continue;
      distinct[d].insert((*v)[d]);
      if (distinct[d].size() > params.max_categories) overflow[d] = true;
    }
  }
  std::vector<std::optional<std::vector<double>>> cats(size);
  for (std::size_t d = 0; d < size; ++d) {
    if (!overflow[d]) cats[d] = std::vector<double>(distinct[d].begin(), distinct[d].end());
  }
  return VectorIndexModel(params, size, std::move(cats));
}

DataTable VectorIndexModel::transform(const DataTable& table) const {
  const auto& cells = vector_input(table, params_.input);
  require_absent(table, params_.output);
  VectorCells out;
  out.reserve(cells.size());
  std::vector<std::size_t> kept;
  bool dropped = false;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    if (!cells[r]) throw DataError("vector indexer: null vector at row " + std::to_string(r + 1));
    if (cells[r]->size() != size_)
      throw DataError("vector indexer: row " + std::to_string(r + 1) + " has size " +
                      std::to_string(cells[r]->size()) + ", expected " + std::to_string(size_));
    std::vector<double> row = cells[r]->to_dense();
    bool skip = false;
    for (std::size_t d = 0; d < size_ && !skip; ++d) {
      if (!categories_[d]) continue;
      const auto& values = *categories_[d];
      auto it = std::lower_bound(values.begin(), values.end(), row[d]);
      if (it != values.end() && *it == row[d]) {
        row[d] = static_cast<double>(it - values.begin());
        continue;
      }
      switch (params_.policy) {
        case InvalidPolicy::keep: row[d] = static_cast<double>(values.size()); break;
        case InvalidPolicy::skip: skip = true; break;
        case InvalidPolicy::error:
          throw DataError("vector indexer: unseen value " + format_double(row[d]) +
                          " in dimension " + std::to_string(d) + " at row " + std::to_string(r + 1));
      }
    }
    if (skip) {
      dropped = true;
      continue;
    }
    kept.push_back(r);
    out.emplace_back(FeatureVector::dense(std::move(row)).compressed());
  }
  return append(table, kept, dropped, Column{{params_.output, ColumnKind::vector, false}, std::move(out)});
}

// --- MinMaxScaler ---------------------------------------------------------

MinMaxModel minmax_fit(const DataTable& table, const MinMaxParams& params) {
  if (!(params.lo < params.hi)) throw std::invalid_argument("min-max range needs lo < hi");
  const auto& cells = vector_input(table, params.input);
  if (cells.empty()) throw DataError("min-max scaler: empty fit table");
  const std::size_t size = constant_size(cells, params.input);
  MinMaxModel m{params, std::vector<double>(size, INFINITY), std::vector<double>(size, -INFINITY)};
  for (const auto& v : cells) {
    for (std::size_t d = 0; d < size; ++d) {
      const double x = (*v)[d];
      m.mins[d] = std::min(m.mins[d], x);
      m.maxs[d] = std::max(m.maxs[d], x);
    }
  }
  return m;
}

double MinMaxModel::scale(std::size_t dim, double x) const {
  const double range = maxs[dim] - mins[dim];
  if (range == 0.0) return 0.5 * (params.hi + params.lo);
  return (x - mins[dim]) / range * (params.hi - params.lo) + params.lo;
}

DataTable MinMaxModel::transform(const DataTable& table) const {
  const auto& cells = vector_input(table, params.input);
  require_absent(table, params.output);
  VectorCells out;
  out.reserve(cells.size());
  for (std::size_t r = 0; r < cells.size(); ++r) {
    if (!cells[r]) throw DataError("min-max scaler: null vector at row " + std::to_string(r + 1));
    if (cells[r]->size() != mins.size())
      throw DataError("min-max scaler: row " + std::to_string(r + 1) + " has wrong size");
    std::vector<double> row(mins.size());
    for (std::size_t d = 0; d < row.size(); ++d) row[d] = scale(d, (*cells[r])[d]);
    out.emplace_back(FeatureVector::dense(std::move(row)).compressed());
  }
  return table.with_column(Column{{params.output, ColumnKind::vector, false}, std::move(out)});
}

// --- JSON -----------------------------------------------------------------

json to_json(const StringIndexerParams& p) {
  return {{"type", "string_indexer"}, {"input", p.input}, {"output", p.output},
          {"handle_invalid", std::string(to_string(p.policy))}};
}
json to_json(const ImputerParams& p) {
  return {{"type", "imputer"}, {"inputs", p.inputs}, {"outputs", p.outputs}};
}
json to_json(const VectorAssembler& p) {
  return {{"type", "vector_assembler"}, {"inputs", p.inputs}, {"output", p.output}};
}
json to_json(const VectorIndexerParams& p) {
  return {{"type", "vector_indexer"}, {"input", p.input}, {"output", p.output},
          {"max_categories", p.max_categories}, {"handle_invalid", std::string(to_string(p.policy))}};
}
json to_json(const MinMaxParams& p) {
  return {{"type", "min_max_scaler"}, {"input", p.input}, {"output", p.output},
          {"min", p.lo}, {"max", p.hi}};
}

StringIndexerParams string_indexer_params_from_json(const json& j) {
  StringIndexerParams p;
  p.input = j.at("input").get<std::string>();
  p.output = j.value("output", p.input + "_idx");
  p.policy = invalid_policy_from_string(j.value("handle_invalid", "keep"));
  return p;
}
ImputerParams imputer_params_from_json(const json& j) {
  ImputerParams p;
  p.inputs = j.at("inputs").get<std::vector<std::string>>();
  p.outputs = j.at("outputs").get<std::vector<std::string>>();
  if (p.inputs.size() != p.outputs.size())
    throw ParseError("imputer: inputs and outputs differ in length");
  return p;
}
VectorAssembler vector_assembler_from_json(const json& j) {
  return VectorAssembler{j.at("inputs").get<std::vector<std::string>>(), j.at("output").get<std::string>()};
}
VectorIndexerParams vector_indexer_params_from_json(const json& j) {
  VectorIndexerParams p;
  p.input = j.at("input").get<std::string>();
  p.output = j.at("output").get<std::string>();
  p.max_categories = j.value("max_categories", p.max_categories);
  p.policy = invalid_policy_from_string(j.value("handle_invalid", "error"));
  return p;
}
MinMaxParams minmax_params_from_json(const json& j) {
  MinMaxParams p;
  p.input = j.at("input").get<std::string>();
  p.output = j.at("output").get<std::string>();
  p.lo = j.value("min", 0.0);
  p.hi = j.value("max", 1.0);
  if (!(p.lo < p.hi)) throw ParseError("min_max_scaler: min must be below max");
  return p;
}

json fitted_to_json(const StringIndexModel& m) {
  json j = to_json(m.params());
  j["labels"] = m.labels();
  return j;
}
json fitted_to_json(const ImputerModel& m) {
  json j = to_json(m.params);
  j["means"] = m.means;
  return j;
}
json fitted_to_json(const VectorIndexModel& m) {
  json j = to_json(m.params());
  j["size"] = m.size();
  json cats = json::array();
  for (const auto& c : m.categories()) cats.push_back(c ? json(*c) : json(nullptr));
  j["categories"] = std::move(cats);
  return j;
}
json fitted_to_json(const MinMaxModel& m) {
  json j = to_json(m.params);
  j["mins"] = m.mins;
  j["maxs"] = m.maxs;
  return j;
}

StringIndexModel string_index_model_from_json(const json& j) {
  return StringIndexModel(string_indexer_params_from_json(j), j.at("labels").get<std::vector<std::string>>());
}
ImputerModel imputer_model_from_json(const json& j) {
  ImputerModel m{imputer_params_from_json(j), j.at("means").get<std::vector<double>>()};
  if (m.means.size() != m.params.inputs.size()) throw ParseError("imputer: means size mismatch");
  return m;
}
VectorIndexModel vector_index_model_from_json(const json& j) {
  std::vector<std::optional<std::vector<double>>> cats;
  for (const auto& c : j.at("categories")) {
    if (c.is_null())
      cats.emplace_back(std::nullopt);
    else
      cats.emplace_back(c.get<std::vector<double>>());
  }
  return VectorIndexModel(vector_indexer_params_from_json(j), j.at("size").get<std::size_t>(), std::move(cats));
}
MinMaxModel minmax_model_from_json(const json& j) {
  MinMaxModel m{minmax_params_from_json(j), j.at("mins").get<std::vector<double>>(),
                j.at("maxs").get<std::vector<double>>()};
  if (m.mins.size() != m.maxs.size()) throw ParseError("min_max_scaler: mins/maxs size mismatch");
  return m;
}

}  // namespace benefitml
