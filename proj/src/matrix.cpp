#include "loopsurro/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "loopsurro/errors.hpp"

namespace loopsurro {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("Matrix::from_rows: ragged rows");
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix Matrix::column(std::span<const double> values) {
  Matrix m(values.size(), 1);
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t c = 0; c < cols_; ++c)
    for (std::size_t r = 0; r < rows_; ++r) t(c, r) = (*this)(r, c);
  return t;
}

Matrix Matrix::col_range(std::size_t begin, std::size_t count) const {
  if (begin + count > cols_) throw ShapeError("Matrix::col_range out of range");
  Matrix m(rows_, count);
  std::copy_n(data_.data() + begin * rows_, count * rows_, m.data());
  return m;
}

Matrix Matrix::select_cols(std::span<const std::size_t> indices) const {
  Matrix m(rows_, indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= cols_) throw ShapeError("Matrix::select_cols index out of range");
    std::copy_n(data_.data() + indices[k] * rows_, rows_, m.data() + k * rows_);
  }
  return m;
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
  Matrix m(indices.size(), cols_);
  for (std::size_t c = 0; c < cols_; ++c)
    for (std::size_t k = 0; k < indices.size(); ++k) {
      if (indices[k] >= rows_) throw ShapeError("Matrix::select_rows index out of range");
      m(k, c) = (*this)(indices[k], c);
    }
  return m;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) {
    const double a = std::abs(x);
    if (!(a <= m)) m = a;  // propagates NaN
  }
  return m;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace loopsurro
