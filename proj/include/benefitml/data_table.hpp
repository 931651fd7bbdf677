#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "benefitml/feature_vector.hpp"

namespace benefitml {

// `vector` never appears in an ingest schema; pipeline stages produce it.
enum class ColumnKind { categorical_text, numeric, boolean, label, vector };

std::string_view to_string(ColumnKind kind);
ColumnKind column_kind_from_string(std::string_view name);

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  bool nullable = true;

  friend bool operator==(const ColumnSpec&, const ColumnSpec&) = default;
};

using TextCells = std::vector<std::optional<std::string>>;
using NumericCells = std::vector<std::optional<double>>;
using BoolCells = std::vector<std::optional<bool>>;
using LabelCells = std::vector<std::optional<int>>;
using VectorCells = std::vector<std::optional<FeatureVector>>;
// Alternative index equals static_cast<int>(ColumnKind).
using ColumnData = std::variant<TextCells, NumericCells, BoolCells, LabelCells, VectorCells>;

struct Column {
  ColumnSpec spec;
  ColumnData cells;

  std::size_t size() const;
  std::size_t null_count() const;
  bool is_null(std::size_t row) const;
};

// Immutable columnar table. Columns are shared between tables derived from
// one another, so appending a column or taking a row subset never copies
// the untouched columns.
class DataTable {
 public:
  DataTable() = default;
  explicit DataTable(std::vector<Column> columns);

  std::size_t row_count() const noexcept { return rows_; }
  std::size_t column_count() const noexcept { return columns_.size(); }
  std::vector<ColumnSpec> schema() const;

  bool has_column(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;
  const Column& column(std::string_view name) const;
  const Column& column(std::size_t index) const { return *columns_.at(index); }
  std::optional<std::string> label_column() const;

  const TextCells& text(std::string_view name) const;
  const NumericCells& numeric(std::string_view name) const;
  const BoolCells& boolean(std::string_view name) const;
  const LabelCells& labels(std::string_view name) const;
  const VectorCells& vectors(std::string_view name) const;

  DataTable with_column(Column column) const;
  // Rows in the given order; indices may repeat.
  DataTable select_rows(std::span<const std::size_t> rows) const;

  friend bool operator==(const DataTable& a, const DataTable& b);

 private:
  std::vector<std::shared_ptr<const Column>> columns_;
  std::size_t rows_ = 0;
};

}  // namespace benefitml
