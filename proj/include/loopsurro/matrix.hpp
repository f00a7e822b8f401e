#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace loopsurro {

// Dense real64 matrix, column-major. Batched quantities keep one sample per
// column (rows = feature dimension, cols = batch size).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  // Row-major literal, convenient in tests: {{1, 2}, {3, 4}}.
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix column(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

  std::span<double> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
  std::span<const double> col(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void fill(double v);
  Matrix transposed() const;
  // Columns [begin, begin + count).
  Matrix col_range(std::size_t begin, std::size_t count) const;
  Matrix select_cols(std::span<const std::size_t> indices) const;
  Matrix select_rows(std::span<const std::size_t> indices) const;
  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double max_abs(std::span<const double> v);
double norm2(std::span<const double> v);
// Pairwise summation with a fixed split, so the result does not depend on how
// the terms were produced (serially or by threads).
double pairwise_sum(std::span<const double> v);

}  // namespace loopsurro
