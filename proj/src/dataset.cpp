#include "benefitml/dataset.hpp"

#include <cmath>

#include "benefitml/error.hpp"

namespace benefitml {

Dataset Dataset::from_rows(const std::vector<std::vector<double>>& rows, std::vector<int> labels) {
  if (rows.size() != labels.size()) throw DataError("dataset: row and label counts differ");
  Dataset d;
  d.rows = rows.size();
  d.cols = rows.empty() ? 0 : rows[0].size();
  d.x.reserve(d.rows * d.cols);
  for (const auto& r : rows) {
    if (r.size() != d.cols) throw DataError("dataset: inconsistent feature dimension");
    for (double v : r) {
      if (!std::isfinite(v)) throw DataError("dataset: non-finite feature value");
      d.x.push_back(v);
    }
  }
  for (int l : labels)
    if (l != 0 && l != 1) throw DataError("dataset: label outside {0,1}");
  d.y = std::move(labels);
  return d;
}

Dataset Dataset::subset(std::span<const std::size_t> idx) const {
  Dataset d;
  d.rows = idx.size();
  d.cols = cols;
  d.x.reserve(idx.size() * cols);
  d.y.reserve(idx.size());
  for (std::size_t i : idx) {
    auto r = row(i);
    d.x.insert(d.x.end(), r.begin(), r.end());
    d.y.push_back(y[i]);
  }
  return d;
}

std::size_t Dataset::positives() const {
  std::size_t n = 0;
  for (int l : y) n += (l == 1);
  return n;
}

Dataset dataset_from_table(const DataTable& table, const std::string& features_col,
                           const std::string& label_col) {
  const auto& feats = table.vectors(features_col);
  const Column& lab = table.column(label_col);
  Dataset d;
  d.rows = table.row_count();
  d.cols = d.rows ? (feats[0] ? feats[0]->size() : 0) : 0;
  d.x.reserve(d.rows * d.cols);
  d.y.reserve(d.rows);
  for (std::size_t r = 0; r < d.rows; ++r) {
    if (!feats[r]) throw DataError("null feature vector at row " + std::to_string(r + 1));
    if (feats[r]->size() != d.cols)
      throw DataError("feature vectors vary in size (row " + std::to_string(r + 1) + ")");
    for (std::size_t j = 0; j < d.cols; ++j) {
      const double v = (*feats[r])[j];
      if (!std::isfinite(v)) throw DataError("non-finite feature at row " + std::to_string(r + 1));
      d.x.push_back(v);
    }
    int label = -1;
    if (const auto* l = std::get_if<LabelCells>(&lab.cells)) {
      if ((*l)[r]) label = *(*l)[r];
    } else if (const auto* num = std::get_if<NumericCells>(&lab.cells)) {
      if ((*num)[r] && (*(*num)[r] == 0.0 || *(*num)[r] == 1.0)) label = static_cast<int>(*(*num)[r]);
    } else {
      throw SchemaError("label column '" + label_col + "' must be a label or numeric column");
    }
    if (label < 0) throw DataError("missing or non-binary label at row " + std::to_string(r + 1));
    d.y.push_back(label);
  }
  return d;
}

}  // namespace benefitml
