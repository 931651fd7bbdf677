#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "benefitml/data_table.hpp"

namespace benefitml {

// Dense row-major design matrix with binary labels.
struct Dataset {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> x;
  std::vector<int> y;

  std::span<const double> row(std::size_t i) const { return {x.data() + i * cols, cols}; }
  double at(std::size_t i, std::size_t j) const { return x[i * cols + j]; }

  static Dataset from_rows(const std::vector<std::vector<double>>& rows, std::vector<int> labels);
  Dataset subset(std::span<const std::size_t> idx) const;
  std::size_t positives() const;
};

// Features from a vector column and labels from a label (or numeric 0/1) column.
Dataset dataset_from_table(const DataTable& table, const std::string& features_col,
                           const std::string& label_col);

}  // namespace benefitml
