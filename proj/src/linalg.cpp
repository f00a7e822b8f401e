#include "loopsurro/linalg.hpp"

#include <cmath>

#include "loopsurro/errors.hpp"

namespace loopsurro {

std::optional<LuFactorization> LuFactorization::factor(Matrix a, double pivot_tol) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw ShapeError("LU: matrix must be square");

  std::vector<double> row_scale(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) row_scale[i] = std::max(row_scale[i], std::abs(a(i, j)));

  LuFactorization f;
  f.perm_.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.perm_[i] = i;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        p = i;
      }
    const double scale = row_scale[f.perm_[p]];
    if (!(scale > 0.0) || !(best > pivot_tol * scale)) return std::nullopt;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      std::swap(f.perm_[k], f.perm_[p]);
    }
    const double pivot = a(k, k);
    for (std::size_t i = k + 1; i < n; ++i) a(i, k) /= pivot;
    for (std::size_t j = k + 1; j < n; ++j) {
      const double akj = a(k, j);
      if (akj == 0.0) continue;
      for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= a(i, k) * akj;
    }
  }
  f.lu_ = std::move(a);
  return f;
}

void LuFactorization::solve_in_place(std::span<double> b) const {
  const std::size_t n = lu_.rows();
  if (b.size() != n) throw ShapeError("LU solve: right-hand side has wrong length");
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j + 1; i < n; ++i) x[i] -= lu_(i, j) * x[j];
  for (std::size_t j = n; j-- > 0;) {
    x[j] /= lu_(j, j);
    for (std::size_t i = 0; i < j; ++i) x[i] -= lu_(i, j) * x[j];
  }
  for (std::size_t i = 0; i < n; ++i) b[i] = x[i];
}

std::vector<double> LuFactorization::solve(std::span<const double> b) const {
  std::vector<double> x(b.begin(), b.end());
  solve_in_place(x);
  return x;
}

}  // namespace loopsurro
