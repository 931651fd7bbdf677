#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>

#include "benefitml/data_table.hpp"

namespace benefitml {

inline constexpr const char* kDefaultLabelSource = "IsCovered";
inline constexpr const char* kDefaultPositiveValue = "Covered";
inline constexpr const char* kLabelColumn = "label";

// Appends a non-null {0,1} label column: 1 iff the source value is one of
// `positive_values` (booleans compare as "true"/"false"). Nulls map to 0.
DataTable derive_label(const DataTable& table, const std::string& source_col,
                       const std::set<std::string>& positive_values,
                       const std::string& label_col = kLabelColumn);

// Exactly floor(fraction * rows) rows drawn without replacement from a seeded
// shuffle, returned in their original order.
DataTable sample_rows(const DataTable& table, double fraction, std::uint64_t seed);
std::vector<std::size_t> sample_indices(std::size_t rows, double fraction, std::uint64_t seed);

struct Split {
  DataTable train;
  DataTable test;
};

// The first floor(test_fraction * rows) entries of a seeded permutation form
// the test set; both parts keep the original row order.
Split train_test_split(const DataTable& table, double test_fraction, std::uint64_t seed);
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t rows, double test_fraction, std::uint64_t seed);

}  // namespace benefitml
