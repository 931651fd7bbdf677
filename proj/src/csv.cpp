#include "benefitml/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "benefitml/error.hpp"

namespace benefitml {

namespace {

struct Field {
  std::string text;
  bool quoted = false;
};

// Splits RFC-4180 records; quoted fields may span lines.
class RecordReader {
 public:
  RecordReader(std::string_view text, const CsvOptions& options)
      : text_(text), opt_(options) {}

  bool next(std::vector<Field>& fields) {
    fields.clear();
    if (pos_ >= text_.size()) return false;
    Field field;
    bool in_quotes = false;
    bool after_quote = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_++];
      if (in_quotes) {
        if (c == opt_.quote) {
          if (pos_ < text_.size() && text_[pos_] == opt_.quote) {
            field.text += c;
            ++pos_;
          } else {
            in_quotes = false;
            after_quote = true;
          }
        } else {
          field.text += c;
        }
        continue;
      }
      if (c == opt_.delimiter) {
        fields.push_back(std::move(field));
        field = Field{};
        after_quote = false;
      } else if (c == '\n' || c == '\r') {
        if (c == '\r' && pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
        ++record_;
        fields.push_back(std::move(field));
        return true;
      } else if (c == opt_.quote && field.text.empty() && !field.quoted) {
        in_quotes = true;
        field.quoted = true;
      } else {
        if (after_quote)
          throw ParseError("record " + std::to_string(record_ + 1) +
                           ": characters after closing quote");
        field.text += c;
      }
    }
    if (in_quotes)
      throw ParseError("record " + std::to_string(record_ + 1) + ": unterminated quoted field");
    ++record_;
    fields.push_back(std::move(field));
    return true;
  }

 private:
  std::string_view text_;
  CsvOptions opt_;
  std::size_t pos_ = 0;
  std::size_t record_ = 0;
};

bool is_blank_record(const std::vector<Field>& fields) {
  return fields.size() == 1 && fields[0].text.empty() && !fields[0].quoted;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [end, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<bool> parse_bool(const std::string& raw) {
  const std::string s = lower(trim(raw));
  if (s == "true" || s == "1" || s == "yes" || s == "t" || s == "y") return true;
  if (s == "false" || s == "0" || s == "no" || s == "f" || s == "n") return false;
  return std::nullopt;
}

std::optional<int> parse_label(const std::string& raw) {
  auto v = parse_number(raw);
  if (v && (*v == 0.0 || *v == 1.0)) return static_cast<int>(*v);
  return std::nullopt;
}

class ColumnBuilder {
 public:
  explicit ColumnBuilder(ColumnSpec spec) : spec_(std::move(spec)) {
    switch (spec_.kind) {
      case ColumnKind::categorical_text: cells_ = TextCells{}; break;
      case ColumnKind::numeric: cells_ = NumericCells{}; break;
      case ColumnKind::boolean: cells_ = BoolCells{}; break;
      case ColumnKind::label: cells_ = LabelCells{}; break;
      case ColumnKind::vector: cells_ = VectorCells{}; break;
    }
  }

  void add(const Field& f, std::size_t row) {
    const bool empty = f.text.empty() && !f.quoted;
    bool null = empty;
    bool malformed = false;
    switch (spec_.kind) {
      case ColumnKind::categorical_text:
        std::get<TextCells>(cells_).push_back(empty ? std::nullopt
                                                    : std::optional<std::string>(f.text));
        break;
      case ColumnKind::numeric: {
        auto v = empty ? std::nullopt : parse_number(f.text);
        malformed = !empty && !v;
        null = !v;
        std::get<NumericCells>(cells_).push_back(v);
        break;
      }
      case ColumnKind::boolean: {
        auto v = empty ? std::nullopt : parse_bool(f.text);
        malformed = !empty && !v;
        null = !v;
        std::get<BoolCells>(cells_).push_back(v);
        break;
      }
      case ColumnKind::label: {
        auto v = empty ? std::nullopt : parse_label(f.text);
        malformed = !empty && !v;
        null = !v;
        std::get<LabelCells>(cells_).push_back(v);
        break;
      }
      case ColumnKind::vector: {
        std::optional<FeatureVector> v;
        if (!empty) {
          try {
            v = FeatureVector::parse(trim(f.text));
          } catch (const std::exception&) {
            malformed = true;
          }
        }
        null = !v;
        std::get<VectorCells>(cells_).push_back(std::move(v));
        break;
      }
    }
    if (null && !spec_.nullable) {
      const std::string what = malformed ? "unparseable value '" + f.text + "'" : "null value";
      throw ParseError("row " + std::to_string(row) + ", column '" + spec_.name + "': " + what +
                           " in non-nullable column",
                       row);
    }
  }

  Column finish() { return Column{std::move(spec_), std::move(cells_)}; }

 private:
  ColumnSpec spec_;
  ColumnData cells_;
};

}  // namespace

DataTable parse_csv(std::string_view text, const std::vector<ColumnSpec>& schema,
                    const CsvOptions& options) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  RecordReader reader(text, options);
  std::vector<Field> fields;
  std::vector<std::size_t> source(schema.size());
  std::size_t expected_fields = schema.size();

  if (options.header) {
    if (!reader.next(fields)) throw ParseError("missing header row");
    expected_fields = fields.size();
    for (std::size_t i = 0; i < schema.size(); ++i) {
      auto it = std::find_if(fields.begin(), fields.end(),
                             [&](const Field& f) { return trim(f.text) == schema[i].name; });
      if (it == fields.end())
        throw ParseError("header has no column named '" + schema[i].name + "'");
      source[i] = static_cast<std::size_t>(it - fields.begin());
    }
  } else {
    for (std::size_t i = 0; i < schema.size(); ++i) source[i] = i;
  }

  std::vector<ColumnBuilder> builders;
  builders.reserve(schema.size());
  for (const auto& spec : schema) builders.emplace_back(spec);

  std::size_t row = 0;
  while (reader.next(fields)) {
    if (is_blank_record(fields)) continue;
    ++row;
    if (fields.size() != expected_fields)
      throw ParseError("row " + std::to_string(row) + ": expected " +
                           std::to_string(expected_fields) + " fields, found " +
                           std::to_string(fields.size()),
                       row);
    for (std::size_t i = 0; i < schema.size(); ++i) builders[i].add(fields[source[i]], row);
  }

  std::vector<Column> columns;
  columns.reserve(builders.size());
  for (auto& b : builders) columns.push_back(b.finish());
  return DataTable(std::move(columns));
}

DataTable read_csv(const std::filesystem::path& path, const std::vector<ColumnSpec>& schema,
                   const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), schema, options);
}

namespace {

std::string quote_if_needed(const std::string& s, const CsvOptions& opt, bool force = false) {
  const bool needs = force || s.empty() ||
                     s.find_first_of(std::string{opt.delimiter, opt.quote, '\n', '\r'}) !=
                         std::string::npos ||
                     s.front() == ' ' || s.back() == ' ';
  if (!needs) return s;
  std::string out(1, opt.quote);
  for (char c : s) {
    if (c == opt.quote) out += opt.quote;
    out += c;
  }
  out += opt.quote;
  return out;
}

std::string render_cell(const Column& col, std::size_t row, const CsvOptions& opt) {
  return std::visit(
      [&](const auto& cells) -> std::string {
        const auto& cell = cells[row];
        if (!cell) return {};
        using T = std::decay_t<decltype(*cell)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return quote_if_needed(*cell, opt);
        } else if constexpr (std::is_same_v<T, double>) {
          return format_double(*cell);
        } else if constexpr (std::is_same_v<T, bool>) {
          return *cell ? "true" : "false";
        } else if constexpr (std::is_same_v<T, int>) {
          return std::to_string(*cell);
        } else {
          return quote_if_needed(cell->to_string(), opt);
        }
      },
      col.cells);
}

}  // namespace

void write_csv(const DataTable& table, std::ostream& out, const CsvOptions& options) {
  if (options.header) {
    for (std::size_t c = 0; c < table.column_count(); ++c) {
      if (c) out << options.delimiter;
      out << quote_if_needed(table.column(c).spec.name, options);
    }
    out << '\n';
  }
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    for (std::size_t c = 0; c < table.column_count(); ++c) {
      if (c) out << options.delimiter;
      out << render_cell(table.column(c), r, options);
    }
    out << '\n';
  }
}

void write_csv(const DataTable& table, const std::filesystem::path& path,
               const CsvOptions& options) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  write_csv(table, out, options);
}

}  // namespace benefitml
