#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "loopsurro/matrix.hpp"

namespace loopsurro {

struct ClusterModel {
  Matrix centroids;  // dim x k
  std::vector<std::size_t> assignments;
  double inertia = 0.0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  // Inertia after each Lloyd update, for diagnostics and tests.
  std::vector<double> inertia_history;

  std::size_t k() const { return centroids.cols(); }
};

// Index of the closest centroid (Euclidean); ties go to the lowest index.
std::size_t nearest_centroid(const Matrix& centroids, std::span<const double> point);

// k-means++ seeding followed by Lloyd iterations until the assignment stops
// changing or max_iter is reached. Points are columns. An empty cluster is
// re-seeded with the point farthest from its own centroid.
ClusterModel kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter = 300);

}  // namespace loopsurro
