#pragma once

#include <cmath>
#include <cstdint>

#include "loopsurro/matrix.hpp"
#include "loopsurro/rng.hpp"

namespace loopsurro::test {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                            double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(lo, hi);
  return m;
}

// |a - b| <= rel * max(|a|, |b|, floor)
inline bool close_rel(double a, double b, double rel, double floor = 1e-12) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace loopsurro::test
