#pragma once

#include <array>

#include "loopsurro/matrix.hpp"

namespace loopsurro {

struct PcaProjection {
  Matrix projected;                     // 2 x N
  Matrix components;                    // dim x 2, orthonormal columns
  std::array<double, 2> explained{};    // fractions of total variance
  bool rank_deficient = false;          // second component is zero
};

// Top two principal components of the columns of `points` by power iteration
// with deflation. Each component's largest-magnitude entry is made positive.
PcaProjection pca_project_2d(const Matrix& points);

}  // namespace loopsurro
