#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "loopsurro/matrix.hpp"

namespace loopsurro {

// Dense LU with partial pivoting, PA = LU stored in place.
class LuFactorization {
 public:
  // Returns nullopt when a pivot falls below pivot_tol times the largest
  // magnitude in its original row (or the row is entirely zero).
  static std::optional<LuFactorization> factor(Matrix a, double pivot_tol = 1e-14);

  // Solves A x = b in place.
  void solve_in_place(std::span<double> b) const;
  std::vector<double> solve(std::span<const double> b) const;

  std::size_t size() const { return lu_.rows(); }

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
};

}  // namespace loopsurro
