#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "benefitml/data_table.hpp"

namespace benefitml {

// Text feature whose value leans toward the label's half of its categories
// with probability `signal`, otherwise uniform over all categories.
struct CategoricalGenerator {
  std::string name;
  std::size_t cardinality = 2;
  double signal = 0.0;
  std::vector<std::string> values;  // optional names; defaults to "<name>_<k>"
  double missing_rate = 0.0;
};

// Integer-valued numeric feature base, base+1, ..., base+levels-1.
struct NumericGenerator {
  std::string name;
  double base = 0.0;
  std::size_t levels = 2;
  double signal = 0.0;
};

struct SynthSpec {
  std::size_t row_count = 10000;
  double positive_rate = 0.81;
  std::uint64_t seed = 1;
  std::vector<CategoricalGenerator> categorical;
  std::vector<NumericGenerator> numeric;
  std::string constant_feature = "IsEHB";  // empty disables it
  std::string constant_value = "Yes";
  std::string label_source = "IsCovered";
  std::string positive_text = "Covered";
  std::string negative_text = "Not Covered";
  // When set, the first two categorical generators carry the label only
  // through the parity of their category indices (an XOR interaction).
  bool interaction = false;

  void validate() const;
};

// Benefits-style table: one dominant categorical feature (Exclusions), weak
// features, a numeric year and a constant column.
SynthSpec default_benefits_spec(std::size_t rows = 10000, double positive_rate = 0.81,
                                std::uint64_t seed = 1);
// Two binary features whose XOR carries the label, plus weak noise columns.
SynthSpec default_interaction_spec(std::size_t rows = 4000, std::uint64_t seed = 7);

DataTable generate_synthetic(const SynthSpec& spec);

// Ingest schema matching the generated columns.
std::vector<ColumnSpec> synthetic_schema(const SynthSpec& spec);

SynthSpec synth_spec_from_json(const nlohmann::json& doc);
nlohmann::json synth_spec_to_json(const SynthSpec& spec);

}  // namespace benefitml
