#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "benefitml/data_table.hpp"

namespace benefitml {

struct CsvOptions {
  char delimiter = ',';
  char quote = '"';
  bool header = true;
};

// With a header, schema columns are located by name and other CSV columns are
// ignored; without one, fields map positionally onto the schema. An unquoted
// empty field is null, a quoted empty field ("") is the empty string.
DataTable parse_csv(std::string_view text, const std::vector<ColumnSpec>& schema,
                    const CsvOptions& options = {});
DataTable read_csv(const std::filesystem::path& path, const std::vector<ColumnSpec>& schema,
                   const CsvOptions& options = {});

void write_csv(const DataTable& table, std::ostream& out, const CsvOptions& options = {});
void write_csv(const DataTable& table, const std::filesystem::path& path,
               const CsvOptions& options = {});

}  // namespace benefitml
