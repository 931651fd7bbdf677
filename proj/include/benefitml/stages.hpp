#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "benefitml/data_table.hpp"

namespace benefitml {

// Behavior on values never seen at fit time.
enum class InvalidPolicy { keep, skip, error };

std::string_view to_string(InvalidPolicy policy);
InvalidPolicy invalid_policy_from_string(std::string_view name);

// Null categorical cells are indexed as this token.
inline constexpr const char* kMissingToken = "__MISSING__";

// --- StringIndexer --------------------------------------------------------

struct StringIndexerParams {
  std::string input;
  std::string output;
  InvalidPolicy policy = InvalidPolicy::keep;
};

// labels[i] is the text mapped to index i: descending frequency, ties by
// ascending text. Unseen text maps to labels.size() under keep.
class StringIndexModel {
 public:
  StringIndexModel() = default;
  StringIndexModel(StringIndexerParams params, std::vector<std::string> labels);

  const StringIndexerParams& params() const noexcept { return params_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::optional<std::size_t> index_of(const std::string& label) const;

  DataTable transform(const DataTable& table) const;

 private:
  StringIndexerParams params_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

StringIndexModel string_indexer_fit(const DataTable& table, const StringIndexerParams& params);

// --- Mean imputer ---------------------------------------------------------

struct ImputerParams {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

// Replaces null numerics with the fit-table mean (0 for an all-null column).
struct ImputerModel {
  ImputerParams params;
  std::vector<double> means;

  DataTable transform(const DataTable& table) const;
};

ImputerModel imputer_fit(const DataTable& table, const ImputerParams& params);

// --- VectorAssembler ------------------------------------------------------

struct VectorAssembler {
  std::vector<std::string> inputs;
  std::string output;

  // Concatenates numeric, boolean, label and vector inputs in declared order.
  // A null input cell is an error naming the row.
  DataTable transform(const DataTable& table) const;
};

// --- VectorIndexer --------------------------------------------------------

struct VectorIndexerParams {
  std::string input;
  std::string output;
  std::size_t max_categories = 20;
  InvalidPolicy policy = InvalidPolicy::error;
};

// A dimension is categorical iff it had at most max_categories distinct fit
// values; those values, ascending, become indices 0..k-1.
class VectorIndexModel {
 public:
  VectorIndexModel() = default;
  VectorIndexModel(VectorIndexerParams params, std::size_t size,
                   std::vector<std::optional<std::vector<double>>> categories);

  const VectorIndexerParams& params() const noexcept { return params_; }
  std::size_t size() const noexcept { return size_; }
  const std::vector<std::optional<std::vector<double>>>& categories() const noexcept {
    return categories_;
  }

  DataTable transform(const DataTable& table) const;

 private:
  VectorIndexerParams params_;
  std::size_t size_ = 0;
  std::vector<std::optional<std::vector<double>>> categories_;
};

VectorIndexModel vector_indexer_fit(const DataTable& table, const VectorIndexerParams& params);

// --- MinMaxScaler ---------------------------------------------------------

struct MinMaxParams {
  std::string input;
  std::string output;
  double lo = 0.0;
  double hi = 1.0;
};

// x -> (x - min) / (max - min) * (hi - lo) + lo, unclamped; constant
// dimensions map to (hi + lo) / 2.
struct MinMaxModel {
  MinMaxParams params;
  std::vector<double> mins;
  std::vector<double> maxs;

  double scale(std::size_t dim, double x) const;
  DataTable transform(const DataTable& table) const;
};

MinMaxModel minmax_fit(const DataTable& table, const MinMaxParams& params);

// --- JSON -----------------------------------------------------------------

nlohmann::json to_json(const StringIndexerParams& p);
nlohmann::json to_json(const ImputerParams& p);
nlohmann::json to_json(const VectorAssembler& p);
nlohmann::json to_json(const VectorIndexerParams& p);
nlohmann::json to_json(const MinMaxParams& p);

StringIndexerParams string_indexer_params_from_json(const nlohmann::json& j);
ImputerParams imputer_params_from_json(const nlohmann::json& j);
VectorAssembler vector_assembler_from_json(const nlohmann::json& j);
VectorIndexerParams vector_indexer_params_from_json(const nlohmann::json& j);
MinMaxParams minmax_params_from_json(const nlohmann::json& j);

nlohmann::json fitted_to_json(const StringIndexModel& m);
nlohmann::json fitted_to_json(const ImputerModel& m);
nlohmann::json fitted_to_json(const VectorIndexModel& m);
nlohmann::json fitted_to_json(const MinMaxModel& m);

StringIndexModel string_index_model_from_json(const nlohmann::json& j);
ImputerModel imputer_model_from_json(const nlohmann::json& j);
VectorIndexModel vector_index_model_from_json(const nlohmann::json& j);
MinMaxModel minmax_model_from_json(const nlohmann::json& j);

}  // namespace benefitml
