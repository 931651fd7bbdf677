#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace benefitml {

// Malformed input data: CSV cells, schemas, config documents.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row = 0)
      : std::runtime_error(what), row_(row) {}
  // 1-based data row the failure refers to, 0 when not row-specific.
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// A column or stage reference that does not resolve against a schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unseen categorical value under handleInvalid=error, non-finite features, etc.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model file container problems: magic, version, checksum, truncation.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace benefitml
