#include "benefitml/data_table.hpp"

#include <set>

#include "benefitml/error.hpp"

namespace benefitml {

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::categorical_text: return "categorical_text";
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::boolean: return "boolean";
    case ColumnKind::label: return "label";
    case ColumnKind::vector: return "vector";
  }
  return "?";
}

ColumnKind column_kind_from_string(std::string_view name) {
  for (auto k : {ColumnKind::categorical_text, ColumnKind::numeric, ColumnKind::boolean,
                 ColumnKind::label, ColumnKind::vector}) {
    if (to_string(k) == name) return k;
  }
  throw ParseError("unknown column kind '" + std::string(name) + "'");
}

std::size_t Column::size() const {
  return std::visit([](const auto& v) { return v.size(); }, cells);
}

std::size_t Column::null_count() const {
  return std::visit(
      [](const auto& v) {
        std::size_t n = 0;
        for (const auto& c : v) n += !c.has_value();
        return n;
      },
      cells);
}

bool Column::is_null(std::size_t row) const {
  return std::visit([row](const auto& v) { return !v.at(row).has_value(); }, cells);
}

namespace {

void validate_column(const Column& col) {
  if (col.spec.name.empty()) throw SchemaError("column with empty name");
  if (static_cast<std::size_t>(col.spec.kind) != col.cells.index())
    throw SchemaError("column '" + col.spec.name + "': storage does not match kind " +
                      std::string(to_string(col.spec.kind)));
  if (!col.spec.nullable && col.null_count() > 0)
    throw DataError("column '" + col.spec.name + "' is not nullable but contains nulls");
  if (const auto* labels = std::get_if<LabelCells>(&col.cells)) {
    for (const auto& v : *labels) {
      if (v && *v != 0 && *v != 1)
        throw DataError("label column '" + col.spec.name + "' holds a value outside {0,1}");
    }
  }
}

}  // namespace

DataTable::DataTable(std::vector<Column> columns) {
  std::set<std::string> names;
  int label_columns = 0;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    validate_column(columns[i]);
    if (!names.insert(columns[i].spec.name).second)
      throw SchemaError("duplicate column name '" + columns[i].spec.name + "'");
    label_columns += columns[i].spec.kind == ColumnKind::label;
    if (i == 0) rows_ = columns[i].size();
    if (columns[i].size() != rows_)
      throw SchemaError("column '" + columns[i].spec.name + "' has " +
                        std::to_string(columns[i].size()) + " rows, expected " +
                        std::to_string(rows_));
  }
  if (label_columns > 1) throw SchemaError("at most one label column is allowed");
  columns_.reserve(columns.size());
  for (auto& c : columns) columns_.push_back(std::make_shared<const Column>(std::move(c)));
}

std::vector<ColumnSpec> DataTable::schema() const {
  std::vector<ColumnSpec> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) out.push_back(c->spec);
  return out;
}

bool DataTable::has_column(std::string_view name) const {
  for (const auto& c : columns_)
    if (c->spec.name == name) return true;
  return false;
}

std::size_t DataTable::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i]->spec.name == name) return i;
  throw SchemaError("unknown column '" + std::string(name) + "'");
}

const Column& DataTable::column(std::string_view name) const { return *columns_[index_of(name)]; }

std::optional<std::string> DataTable::label_column() const {
  for (const auto& c : columns_)
    if (c->spec.kind == ColumnKind::label) return c->spec.name;
  return std::nullopt;
}

namespace {

template <typename Cells>
const Cells& typed(const Column& col, ColumnKind expected) {
  const auto* cells = std::get_if<Cells>(&col.cells);
  if (!cells)
    throw SchemaError("column '" + col.spec.name + "' is " + std::string(to_string(col.spec.kind)) +
                      ", expected " + std::string(to_string(expected)));
  return *cells;
}

}  // namespace

const TextCells& DataTable::text(std::string_view name) const {
  return typed<TextCells>(column(name), ColumnKind::categorical_text);
}
const NumericCells& DataTable::numeric(std::string_view name) const {
  return typed<NumericCells>(column(name), ColumnKind::numeric);
}
const BoolCells& DataTable::boolean(std::string_view name) const {
  return typed<BoolCells>(column(name), ColumnKind::boolean);
}
const LabelCells& DataTable::labels(std::string_view name) const {
  return typed<LabelCells>(column(name), ColumnKind::label);
}
const VectorCells& DataTable::vectors(std::string_view name) const {
  return typed<VectorCells>(column(name), ColumnKind::vector);
}

DataTable DataTable::with_column(Column column) const {
  validate_column(column);
  if (has_column(column.spec.name))
    throw SchemaError("column '" + column.spec.name + "' already exists");
  if (!columns_.empty() && column.size() != rows_)
    throw SchemaError("column '" + column.spec.name + "' has wrong length");
  if (column.spec.kind == ColumnKind::label && label_column())
    throw SchemaError("table already has a label column");
  DataTable out = *this;
  if (columns_.empty()) out.rows_ = column.size();
  out.columns_.push_back(std::make_shared<const Column>(std::move(column)));
  return out;
}

DataTable DataTable::select_rows(std::span<const std::size_t> rows) const {
  DataTable out;
  out.rows_ = rows.size();
  out.columns_.reserve(columns_.size());
  for (const auto& col : columns_) {
    Column picked{col->spec, {}};
    picked.cells = std::visit(
        [&](const auto& src) -> ColumnData {
          std::decay_t<decltype(src)> dst;
          dst.reserve(rows.size());
          for (std::size_t r : rows) dst.push_back(src.at(r));
          return dst;
        },
        col->cells);
    out.columns_.push_back(std::make_shared<const Column>(std::move(picked)));
  }
  return out;
}

bool operator==(const DataTable& a, const DataTable& b) {
  if (a.rows_ != b.rows_ || a.columns_.size() != b.columns_.size()) return false;
  for (std::size_t i = 0; i < a.columns_.size(); ++i) {
    const Column& x = *a.columns_[i];
    const Column& y = *b.columns_[i];
    if (!(x.spec == y.spec) || !(x.cells == y.cells)) return false;
  }
  return true;
}

}  // namespace benefitml
