#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace benefitml {

// A real vector stored either densely or as (size, ascending indices, values).
// Equality is by value, independent of representation.
class FeatureVector {
 public:
  FeatureVector() = default;

  static FeatureVector dense(std::vector<double> values);
  static FeatureVector sparse(std::size_t size, std::vector<std::size_t> indices,
                              std::vector<double> values);

  std::size_t size() const noexcept { return size_; }
  bool is_sparse() const noexcept { return sparse_; }
  double operator[](std::size_t i) const;
  std::size_t nonzeros() const;

  // Stored entries; for a dense vector indices() is empty.
  std::span<const std::size_t> indices() const noexcept { return indices_; }
  std::span<const double> values() const noexcept { return values_; }

  std::vector<double> to_dense() const;
  // Chooses the representation with the smaller footprint (sparse when
  // 1.5 * (nnz + 1) < size), mirroring how assembled rows are displayed.
  FeatureVector compressed() const;

  // "[a,b,c]" or "(n,[i,j],[a,b])"; numbers use the shortest round-trip form.
  std::string to_string() const;
  static FeatureVector parse(const std::string& text);

  friend bool operator==(const FeatureVector& a, const FeatureVector& b);

 private:
  std::size_t size_ = 0;
  bool sparse_ = false;
  std::vector<std::size_t> indices_;
  std::vector<double> values_;
};

std::string format_double(double v);

}  // namespace benefitml
