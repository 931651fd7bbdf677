#include "benefitml/feature_vector.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "benefitml/error.hpp"

namespace benefitml {

namespace {

void check_finite(std::span<const double> values) {
  for (double v : values) {
    if (std::isnan(v)) throw DataError("feature vector contains NaN");
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  std::string s(buf, end);
  if (std::isfinite(v) && s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

FeatureVector FeatureVector::dense(std::vector<double> values) {
  check_finite(values);
  FeatureVector v;
  v.size_ = values.size();
  v.values_ = std::move(values);
  return v;
}

FeatureVector FeatureVector::sparse(std::size_t size, std::vector<std::size_t> indices,
                                    std::vector<double> values) {
  if (indices.size() != values.size())
    throw DataError("sparse vector: indices and values differ in length");
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= size) throw DataError("sparse vector: index out of range");
    if (k > 0 && indices[k] <= indices[k - 1])
      throw DataError("sparse vector: indices must be strictly ascending");
  }
  check_finite(values);
  FeatureVector v;
  v.size_ = size;
  v.sparse_ = true;
  v.indices_ = std::move(indices);
  v.values_ = std::move(values);
  return v;
}

double FeatureVector::operator[](std::size_t i) const {
  if (i >= size_) throw std::out_of_range("feature index out of range");
  if (!sparse_) return values_[i];
  auto it = std::lower_bound(indices_.begin(), indices_.end(), i);
  if (it != indices_.end() && *it == i) return values_[static_cast<std::size_t>(it - indices_.begin())];
  return 0.0;
}

std::size_t FeatureVector::nonzeros() const {
  std::size_t n = 0;
  for (double v : values_) n += (v != 0.0);
  return n;
}

std::vector<double> FeatureVector::to_dense() const {
  if (!sparse_) return values_;
  std::vector<double> out(size_, 0.0);
  for (std::size_t k = 0; k < indices_.size(); ++k) out[indices_[k]] = values_[k];
  return out;
}

FeatureVector FeatureVector::compressed() const {
  const std::size_t nnz = nonzeros();
  if (1.5 * static_cast<double>(nnz + 1) < static_cast<double>(size_)) {
    std::vector<std::size_t> idx;
    std::vector<double> val;
    idx.reserve(nnz);
    val.reserve(nnz);
    for (std::size_t i = 0; i < size_; ++i) {
      const double x = (*this)[i];
      if (x != 0.0) {
        idx.push_back(i);
        val.push_back(x);
      }
    }
    return sparse(size_, std::move(idx), std::move(val));
  }
  return dense(to_dense());
}

std::string FeatureVector::to_string() const {
  std::ostringstream out;
  auto list = [&](auto&& seq, auto&& fmt) {
    out << '[';
    for (std::size_t k = 0; k < seq.size(); ++k) {
      if (k) out << ',';
      out << fmt(seq[k]);
    }
    out << ']';
  };
  if (sparse_) {
    out << '(' << size_ << ',';
    list(indices_, [](std::size_t i) { return std::to_string(i); });
    out << ',';
    list(values_, format_double);
    out << ')';
  } else {
    list(values_, format_double);
  }
  return out.str();
}

namespace {

std::vector<double> parse_number_list(const std::string& s, std::size_t& pos) {
  std::vector<double> out;
  if (pos >= s.size() || s[pos] != '[') throw ParseError("vector: expected '['");
  ++pos;
  while (pos < s.size() && s[pos] == ' ') ++pos;
  if (pos < s.size() && s[pos] == ']') {
    ++pos;
    return out;
  }
  while (true) {
    while (pos < s.size() && s[pos] == ' ') ++pos;
    double v = 0.0;
    auto [end, ec] = std::from_chars(s.data() + pos, s.data() + s.size(), v);
    if (ec != std::errc()) throw ParseError("vector: bad number in '" + s + "'");
    pos = static_cast<std::size_t>(end - s.data());
    out.push_back(v);
    while (pos < s.size() && s[pos] == ' ') ++pos;
    if (pos >= s.size()) throw ParseError("vector: unterminated list");
    if (s[pos] == ']') {
      ++pos;
      return out;
    }
    if (s[pos] != ',') throw ParseError("vector: expected ','");
    ++pos;
  }
}

}  // namespace

FeatureVector FeatureVector::parse(const std::string& text) {
  std::size_t pos = 0;
  if (!text.empty() && text[0] == '[') {
    auto values = parse_number_list(text, pos);
    if (pos != text.size()) throw ParseError("vector: trailing characters");
    return dense(std::move(values));
  }
  if (text.empty() || text[0] != '(') throw ParseError("vector: expected '[' or '('");
  pos = 1;
  std::size_t size = 0;
  auto [end, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), size);
  if (ec != std::errc()) throw ParseError("vector: bad size");
  pos = static_cast<std::size_t>(end - text.data());
  if (pos >= text.size() || text[pos] != ',') throw ParseError("vector: expected ','");
  ++pos;
  auto raw_idx = parse_number_list(text, pos);
  if (pos >= text.size() || text[pos] != ',') throw ParseError("vector: expected ','");
  ++pos;
  auto values = parse_number_list(text, pos);
  if (pos >= text.size() || text[pos] != ')' || pos + 1 != text.size())
    throw ParseError("vector: expected ')'");
  std::vector<std::size_t> idx;
  idx.reserve(raw_idx.size());
  for (double d : raw_idx) {
    if (d < 0 || d != std::floor(d)) throw ParseError("vector: bad index");
    idx.push_back(static_cast<std::size_t>(d));
  }
  return sparse(size, std::move(idx), std::move(values));
}

bool operator==(const FeatureVector& a, const FeatureVector& b) {
  if (a.size_ != b.size_) return false;
  for (std::size_t i = 0; i < a.size_; ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

}  // namespace benefitml
