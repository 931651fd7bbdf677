#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "benefitml/data_table.hpp"

namespace benefitml {

// Schema document: {"columns": [{"name", "kind", "nullable"}...]} or a bare array.
std::vector<ColumnSpec> schema_from_json(const nlohmann::json& doc);
nlohmann::json schema_to_json(const std::vector<ColumnSpec>& schema);
std::vector<ColumnSpec> load_schema(const std::filesystem::path& path);

nlohmann::json load_json(const std::filesystem::path& path);
void save_json(const nlohmann::json& doc, const std::filesystem::path& path, int indent = 2);

// Canonical columnar snapshot; the serialized text is a pure function of the
// table contents.
nlohmann::json table_to_json(const DataTable& table);
DataTable table_from_json(const nlohmann::json& doc);
void save_table(const DataTable& table, const std::filesystem::path& path);
DataTable load_table(const std::filesystem::path& path);

// FNV-1a over the canonical snapshot text.
std::uint64_t fingerprint(const DataTable& table);
std::string fingerprint_hex(const DataTable& table);

}  // namespace benefitml
