#include "benefitml/table_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "benefitml/error.hpp"

namespace benefitml {

using nlohmann::json;

namespace {

constexpr const char* kTableFormat = "benefitml-table";
constexpr int kTableVersion = 1;

}  // namespace

std::vector<ColumnSpec> schema_from_json(const json& doc) {
  const json& cols = doc.is_array() ? doc : doc.at("columns");
  if (!cols.is_array()) throw ParseError("schema: 'columns' must be an array");
  std::vector<ColumnSpec> out;
  for (const auto& c : cols) {
    ColumnSpec spec;
    try {
      spec.name = c.at("name").get<std::string>();
      spec.kind = column_kind_from_string(c.at("kind").get<std::string>());
      spec.nullable = c.value("nullable", true);
    } catch (const json::exception& e) {
      throw ParseError(std::string("schema: ") + e.what());
    }
    out.push_back(std::move(spec));
  }
  int labels = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    labels += out[i].kind == ColumnKind::label;
    for (std::size_t j = 0; j < i; ++j)
      if (out[i].name == out[j].name)
        throw ParseError("schema: duplicate column '" + out[i].name + "'");
  }
  if (labels > 1) throw ParseError("schema: more than one label column");
  return out;
}

json schema_to_json(const std::vector<ColumnSpec>& schema) {
  json cols = json::array();
  for (const auto& s : schema)
    cols.push_back({{"name", s.name}, {"kind", std::string(to_string(s.kind))}, {"nullable", s.nullable}});
  return json{{"columns", cols}};
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path.string() + "': " + e.what());
  }
}

void save_json(const json& doc, const std::filesystem::path& path, int indent) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << doc.dump(indent) << '\n';
}

std::vector<ColumnSpec> load_schema(const std::filesystem::path& path) {
  return schema_from_json(load_json(path));
}

json table_to_json(const DataTable& table) {
  json columns = json::array();
  for (std::size_t c = 0; c < table.column_count(); ++c) {
    const Column& col = table.column(c);
    json values = json::array();
    std::visit(
        [&](const auto& cells) {
          for (const auto& cell : cells) {
            if (!cell) {
              values.push_back(nullptr);
              continue;
            }
            using T = std::decay_t<decltype(*cell)>;
            if constexpr (std::is_same_v<T, FeatureVector>)
              values.push_back(cell->to_string());
            else
              values.push_back(*cell);
          }
        },
        col.cells);
    columns.push_back(std::move(values));
  }
  return json{{"format", kTableFormat},
              {"version", kTableVersion},
              {"rows", table.row_count()},
              {"schema", schema_to_json(table.schema())["columns"]},
              {"columns", std::move(columns)}};
}

DataTable table_from_json(const json& doc) {
  if (doc.value("format", "") != kTableFormat)
    throw FormatError("not a benefitml table snapshot");
  if (doc.value("version", 0) != kTableVersion)
    throw FormatError("unsupported table snapshot version " + doc.value("version", json(0)).dump());
  const auto schema = schema_from_json(doc.at("schema"));
  const json& data = doc.at("columns");
  if (data.size() != schema.size()) throw FormatError("table snapshot: column count mismatch");
  std::vector<Column> columns;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    Column col{schema[c], {}};
    const json& values = data[c];
    auto fill = [&](auto cells, auto convert) {
      cells.reserve(values.size());
      for (const auto& v : values) {
        if (v.is_null())
          cells.emplace_back(std::nullopt);
        else
          cells.emplace_back(convert(v));
      }
      col.cells = std::move(cells);
    };
    switch (schema[c].kind) {
      case ColumnKind::categorical_text:
        fill(TextCells{}, [](const json& v) { return v.get<std::string>(); });
        break;
      case ColumnKind::numeric:
        fill(NumericCells{}, [](const json& v) { return v.get<double>(); });
        break;
      case ColumnKind::boolean:
        fill(BoolCells{}, [](const json& v) { return v.get<bool>(); });
        break;
      case ColumnKind::label:
        fill(LabelCells{}, [](const json& v) { return v.get<int>(); });
        break;
      case ColumnKind::vector:
        fill(VectorCells{}, [](const json& v) { return FeatureVector::parse(v.get<std::string>()); });
        break;
    }
    columns.push_back(std::move(col));
  }
  return DataTable(std::move(columns));
}

void save_table(const DataTable& table, const std::filesystem::path& path) {
  save_json(table_to_json(table), path, -1);
}

DataTable load_table(const std::filesystem::path& path) {
  try {
    return table_from_json(load_json(path));
  } catch (const json::exception& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
}

std::uint64_t fingerprint(const DataTable& table) {
  const std::string text = table_to_json(table).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fingerprint_hex(const DataTable& table) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fingerprint(table)));
  return buf;
}

}  // namespace benefitml
