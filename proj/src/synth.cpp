#include "benefitml/synth.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "benefitml/error.hpp"
#include "benefitml/rng.hpp"

namespace benefitml {

using nlohmann::json;

void SynthSpec::validate() const {
  if (row_count == 0) throw std::invalid_argument("synth: row_count must be positive");
  if (!(positive_rate > 0.0 && positive_rate < 1.0))
    throw std::invalid_argument("synth: positive_rate must lie strictly inside (0, 1)");
  std::set<std::string> names{label_source};
  if (!constant_feature.empty() && !names.insert(constant_feature).second)
    throw std::invalid_argument("synth: duplicate column '" + constant_feature + "'");
  for (const auto& g : categorical) {
    if (g.cardinality < 1) throw std::invalid_argument("synth: cardinality must be >= 1");
    if (!g.values.empty() && g.values.size() != g.cardinality)
      throw std::invalid_argument("synth: '" + g.name + "' lists " +
                                  std::to_string(g.values.size()) + " values for cardinality " +
                                  std::to_string(g.cardinality));
    if (g.signal < 0.0 || g.signal > 1.0 || g.missing_rate < 0.0 || g.missing_rate >= 1.0)
      throw std::invalid_argument("synth: '" + g.name + "' has a probability outside [0, 1]");
    if (!names.insert(g.name).second)
      throw std::invalid_argument("synth: duplicate column '" + g.name + "'");
  }
  for (const auto& g : numeric) {
    if (g.levels < 1) throw std::invalid_argument("synth: levels must be >= 1");
    if (g.signal < 0.0 || g.signal > 1.0)
      throw std::invalid_argument("synth: '" + g.name + "' has a signal outside [0, 1]");
    if (!names.insert(g.name).second)
      throw std::invalid_argument("synth: duplicate column '" + g.name + "'");
  }
  if (interaction &&
      (categorical.size() < 2 || categorical[0].cardinality < 2 || categorical[1].cardinality < 2))
    throw std::invalid_argument("synth: interaction needs two categorical features with >= 2 values");
}

SynthSpec default_benefits_spec(std::size_t rows, double positive_rate, std::uint64_t seed) {
  SynthSpec s;
  s.row_count = rows;
  s.positive_rate = positive_rate;
  s.seed = seed;
  s.categorical = {
      {"StateCode", 12, 0.02,
       {"AK", "AL", "AR", "AZ", "DE", "FL", "GA", "IA", "IL", "IN", "KS", "LA"}, 0.0},
      {"SourceName", 3, 0.03, {"HIOS", "OPM", "SERFF"}, 0.0},
      {"IssuerId", 15, 0.06, {}, 0.0},
      {"QuantLimitOnSvc", 2, 0.05, {"Yes", "No"}, 0.02},
      {"Exclusions", 8, 0.40,
       {"None", "Cosmetic", "Orthodontia", "Waiting period", "Age limit", "Frequency limit",
        "Out of network", "Prior authorization"},
       0.02},
  };
  s.numeric = {{"BusinessYear", 2017, 5, 0.06}};
  return s;
}

SynthSpec default_interaction_spec(std::size_t rows, std::uint64_t seed) {
  SynthSpec s;
  s.row_count = rows;
  s.positive_rate = 0.5;
  s.seed = seed;
  s.interaction = true;
  s.categorical = {
      {"PlanTier", 2, 0.95, {"Bronze", "Gold"}, 0.0},
      {"NetworkType", 2, 0.95, {"HMO", "PPO"}, 0.0},
      {"StateCode", 6, 0.0, {"AK", "AL", "AR", "AZ", "DE", "FL"}, 0.0},
      {"SourceName", 3, 0.0, {"HIOS", "OPM", "SERFF"}, 0.0},
  };
  s.numeric = {{"BusinessYear", 2017, 5, 0.0}};
  return s;
}

namespace {

std::size_t draw_category(Rng& rng, std::size_t cardinality, double signal, int label) {
  if (cardinality == 1) return 0;
  if (rng.bernoulli(signal)) {
    const std::size_t half = (cardinality + 1) / 2;
    return label == 1 ? rng.below(half) : half + rng.below(cardinality - half);
  }
  return rng.below(cardinality);
}

std::string category_text(const CategoricalGenerator& g, std::size_t k) {
  if (!g.values.empty()) return g.values[k];
  return g.name + "_" + std::to_string(k);
}

}  // namespace

DataTable generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t n = spec.row_count;
  std::vector<TextCells> text(spec.categorical.size(), TextCells(n));
  std::vector<NumericCells> nums(spec.numeric.size(), NumericCells(n));
  TextCells label_text(n);

  for (std::size_t r = 0; r < n; ++r) {
    const int label = rng.bernoulli(spec.positive_rate) ? 1 : 0;
    std::size_t first = 0;
    for (std::size_t g = 0; g < spec.categorical.size(); ++g) {
      const auto& gen = spec.categorical[g];
      std::size_t k = 0;
      if (spec.interaction && g < 2) {
        if (g == 0) {
          k = rng.below(gen.cardinality);
          first = k;
        } else if (rng.bernoulli(gen.signal)) {
          // Pick a value whose parity combined with the first feature's gives the label.
          const std::size_t want = static_cast<std::size_t>(label) ^ (first & 1u);
          const std::size_t matching = want == 0 ? (gen.cardinality + 1) / 2 : gen.cardinality / 2;
          k = 2 * rng.below(matching) + want;
        } else {
          k = rng.below(gen.cardinality);
        }
      } else {
        k = draw_category(rng, gen.cardinality, gen.signal, label);
      }
      const bool missing = gen.missing_rate > 0.0 && rng.bernoulli(gen.missing_rate);
      if (!missing) text[g][r] = category_text(gen, k);
    }
    for (std::size_t g = 0; g < spec.numeric.size(); ++g) {
      const auto& gen = spec.numeric[g];
      nums[g][r] = gen.base + static_cast<double>(draw_category(rng, gen.levels, gen.signal, label));
    }
    label_text[r] = label == 1 ? spec.positive_text : spec.negative_text;
  }

  std::vector<Column> columns;
  for (std::size_t g = 0; g < spec.categorical.size(); ++g)
    columns.push_back({{spec.categorical[g].name, ColumnKind::categorical_text, true}, std::move(text[g])});
  for (std::size_t g = 0; g < spec.numeric.size(); ++g)
    columns.push_back({{spec.numeric[g].name, ColumnKind::numeric, true}, std::move(nums[g])});
  if (!spec.constant_feature.empty())
    columns.push_back({{spec.constant_feature, ColumnKind::categorical_text, true},
                       TextCells(n, spec.constant_value)});
  columns.push_back({{spec.label_source, ColumnKind::categorical_text, false}, std::move(label_text)});
  return DataTable(std::move(columns));
}

std::vector<ColumnSpec> synthetic_schema(const SynthSpec& spec) {
  std::vector<ColumnSpec> out;
  for (const auto& g : spec.categorical) out.push_back({g.name, ColumnKind::categorical_text, true});
  for (const auto& g : spec.numeric) out.push_back({g.name, ColumnKind::numeric, true});
  if (!spec.constant_feature.empty())
    out.push_back({spec.constant_feature, ColumnKind::categorical_text, true});
  out.push_back({spec.label_source, ColumnKind::categorical_text, false});
  return out;
}

SynthSpec synth_spec_from_json(const json& doc) {
  SynthSpec s;
  s.categorical.clear();
  try {
    s.row_count = doc.value("row_count", s.row_count);
    s.positive_rate = doc.value("positive_rate", s.positive_rate);
    s.seed = doc.value("seed", s.seed);
    s.constant_feature = doc.value("constant_feature", s.constant_feature);
    s.constant_value = doc.value("constant_value", s.constant_value);
    s.label_source = doc.value("label_source", s.label_source);
    s.positive_text = doc.value("positive_text", s.positive_text);
    s.negative_text = doc.value("negative_text", s.negative_text);
    s.interaction = doc.value("interaction", false);
    for (const auto& g : doc.value("categorical", json::array())) {
      CategoricalGenerator c;
      c.name = g.at("name").get<std::string>();
      c.values = g.value("values", std::vector<std::string>{});
      c.cardinality = g.value("cardinality", c.values.empty() ? std::size_t{2} : c.values.size());
      c.signal = g.value("signal", 0.0);
      c.missing_rate = g.value("missing_rate", 0.0);
      s.categorical.push_back(std::move(c));
    }
    for (const auto& g : doc.value("numeric", json::array())) {
      NumericGenerator num;
      num.name = g.at("name").get<std::string>();
      num.base = g.value("base", 0.0);
      num.levels = g.value("levels", std::size_t{2});
      num.signal = g.value("signal", 0.0);
      s.numeric.push_back(std::move(num));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("synth spec: ") + e.what());
  }
  s.validate();
  return s;
}

json synth_spec_to_json(const SynthSpec& s) {
  json cats = json::array();
  for (const auto& g : s.categorical) {
    json c{{"name", g.name}, {"cardinality", g.cardinality}, {"signal", g.signal}};
    if (!g.values.empty()) c["values"] = g.values;
    if (g.missing_rate > 0.0) c["missing_rate"] = g.missing_rate;
    cats.push_back(std::move(c));
  }
  json nums = json::array();
  for (const auto& g : s.numeric)
    nums.push_back({{"name", g.name}, {"base", g.base}, {"levels", g.levels}, {"signal", g.signal}});
  return json{{"row_count", s.row_count},       {"positive_rate", s.positive_rate},
              {"seed", s.seed},                 {"categorical", cats},
              {"numeric", nums},                {"constant_feature", s.constant_feature},
              {"constant_value", s.constant_value}, {"label_source", s.label_source},
              {"positive_text", s.positive_text}, {"negative_text", s.negative_text},
              {"interaction", s.interaction}};
}

}  // namespace benefitml
