#include "loopsurro/clustering.hpp"

#include <limits>

#include "loopsurro/errors.hpp"
#include "loopsurro/rng.hpp"

namespace loopsurro {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double assign(const Matrix& points, const Matrix& centroids, std::vector<std::size_t>& assignments,
              std::vector<double>& dist) {
  const std::size_t n = points.cols();
#pragma omp parallel for schedule(static) if (n > 4096)
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t c = nearest_centroid(centroids, points.col(j));
    assignments[j] = c;
    dist[j] = sq_dist(points.col(j), centroids.col(c));
  }
  return pairwise_sum(dist);
}

}  // namespace

std::size_t nearest_centroid(const Matrix& centroids, std::span<const double> point) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.cols(); ++c) {
    const double d = sq_dist(point, centroids.col(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

ClusterModel kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iter) {
  const std::size_t n = points.cols();
  const std::size_t dim = points.rows();
  if (k == 0) throw ConfigError("kmeans: k must be at least 1");
  if (k > n)
    throw ConfigError("kmeans: k = " + std::to_string(k) + " exceeds the number of points (" +
                      std::to_string(n) + ")");

  Rng rng(seed);
  ClusterModel model;
  model.seed = seed;
  model.centroids = Matrix(dim, k);

  // k-means++ seeding.
  std::vector<bool> used(n, false);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t first = rng.below(n);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t pick = first;
    if (c > 0) {
      const double total = pairwise_sum(d2);
      if (total > 0.0) {
        const double target = rng.uniform() * total;
        double acc = 0.0;
        pick = n;
        for (std::size_t j = 0; j < n; ++j) {
          if (d2[j] <= 0.0) continue;
          acc += d2[j];
          pick = j;
          if (acc > target) break;
        }
      } else {
        // Every remaining point coincides with a centroid: take the next unused one.
        pick = n;
        for (std::size_t j = 0; j < n && pick == n; ++j)
          if (!used[j]) pick = j;
      }
    }
    used[pick] = true;
    std::copy(points.col(pick).begin(), points.col(pick).end(), model.centroids.col(c).begin());
    for (std::size_t j = 0; j < n; ++j)
      d2[j] = std::min(d2[j], sq_dist(points.col(j), model.centroids.col(c)));
  }

  model.assignments.assign(n, 0);
  std::vector<double> dist(n, 0.0);
  model.inertia = assign(points, model.centroids, model.assignments, dist);

  for (std::size_t it = 0; it < max_iter; ++it) {
    Matrix sums(dim, k);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t c = model.assignments[j];
      ++counts[c];
      for (std::size_t r = 0; r < dim; ++r) sums(r, c) += points(r, j);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        std::size_t far = 0;
        for (std::size_t j = 1; j < n; ++j)
          if (dist[j] > dist[far]) far = j;
        std::copy(points.col(far).begin(), points.col(far).end(), model.centroids.col(c).begin());
        dist[far] = 0.0;
        continue;
      }
      for (std::size_t r = 0; r < dim; ++r)
        model.centroids(r, c) = sums(r, c) / static_cast<double>(counts[c]);
    }
    const std::vector<std::size_t> previous = model.assignments;
    model.inertia = assign(points, model.centroids, model.assignments, dist);
    model.inertia_history.push_back(model.inertia);
    model.iterations = it + 1;
    if (model.assignments == previous) break;
  }
  return model;
}

}  // namespace loopsurro
