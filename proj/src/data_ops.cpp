#include "benefitml/data_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "benefitml/error.hpp"
#include "benefitml/rng.hpp"

namespace benefitml {

DataTable derive_label(const DataTable& table, const std::string& source_col,
                       const std::set<std::string>& positive_values, const std::string& label_col) {
  const Column& src = table.column(source_col);
  if (src.spec.kind != ColumnKind::categorical_text && src.spec.kind != ColumnKind::boolean)
    throw SchemaError("label source '" + source_col + "' must be categorical_text or boolean");
  if (table.row_count() > 0 && src.null_count() == table.row_count())
    throw DataError("label source '" + source_col + "' is entirely null");

  LabelCells labels;
  labels.reserve(table.row_count());
  if (const auto* text = std::get_if<TextCells>(&src.cells)) {
    for (const auto& v : *text) labels.emplace_back(v && positive_values.count(*v) ? 1 : 0);
  } else {
    const auto& flags = std::get<BoolCells>(src.cells);
    for (const auto& v : flags)
      labels.emplace_back(v && positive_values.count(*v ? "true" : "false") ? 1 : 0);
  }
  return table.with_column(Column{{label_col, ColumnKind::label, false}, std::move(labels)});
}

namespace {

std::size_t exact_count(std::size_t rows, double fraction) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(rows)));
}

}  // namespace

std::vector<std::size_t> sample_indices(std::size_t rows, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("sample fraction must lie in (0, 1]");
  Rng rng(seed);
  auto perm = rng.permutation(rows);
  perm.resize(exact_count(rows, fraction));
  std::sort(perm.begin(), perm.end());
  return perm;
}

DataTable sample_rows(const DataTable& table, double fraction, std::uint64_t seed) {
  const auto idx = sample_indices(table.row_count(), fraction, seed);
  return table.select_rows(idx);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t rows, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("test fraction must lie strictly inside (0, 1)");
  if (rows < 2) throw std::invalid_argument("train/test split needs at least 2 rows");
  Rng rng(seed);
  auto perm = rng.permutation(rows);
  const std::size_t n_test = exact_count(rows, test_fraction);
  std::vector<std::size_t> test(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {std::move(train), std::move(test)};
}

Split train_test_split(const DataTable& table, double test_fraction, std::uint64_t seed) {
  auto [train, test] = split_indices(table.row_count(), test_fraction, seed);
  return {table.select_rows(train), table.select_rows(test)};
}

}  // namespace benefitml
