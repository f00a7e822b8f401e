#include "loopsurro/pca.hpp"

#include <cmath>
#include <vector>

#include "loopsurro/errors.hpp"

namespace loopsurro {

namespace {

// Dominant eigenpair of the symmetric matrix c, restricted to the orthogonal
// complement of `against` (if non-empty).
std::pair<double, std::vector<double>> power_iteration(const Matrix& c,
                                                       const std::vector<double>& against) {
  const std::size_t d = c.rows();
  std::vector<double> v(d), w(d);
  for (std::size_t i = 0; i < d; ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i);
  auto project_normalize = [&](std::vector<double>& u) {
    if (!against.empty()) {
      double dot = 0.0;
      for (std::size_t i = 0; i < d; ++i) dot += u[i] * against[i];
      for (std::size_t i = 0; i < d; ++i) u[i] -= dot * against[i];
    }
    const double n = norm2(u);
    if (n > 0.0)
      for (double& x : u) x /= n;
    return n;
  };
  if (project_normalize(v) == 0.0) {
    v.assign(d, 0.0);
    v[d - 1] = 1.0;
    project_normalize(v);
  }
  double lambda = 0.0;
  for (int it = 0; it < 10000; ++it) {
    for (std::size_t r = 0; r < d; ++r) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += c(r, k) * v[k];
      w[r] = s;
    }
    const double n = project_normalize(w);
    if (n == 0.0) return {0.0, v};
    double diff = 0.0;
    for (std::size_t i = 0; i < d; ++i) diff = std::max(diff, std::abs(w[i] - v[i]));
    v.swap(w);
    lambda = n;
    if (diff < 1e-13) break;
  }
  // Rayleigh quotient.
  double num = 0.0;
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t k = 0; k < d; ++k) num += v[r] * c(r, k) * v[k];
  lambda = num;
  return {lambda, v};
}

void fix_sign(std::vector<double>& v) {
  std::size_t big = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[big])) big = i;
  if (v[big] < 0.0)
    for (double& x : v) x = -x;
}

}  // namespace

PcaProjection pca_project_2d(const Matrix& points) {
  const std::size_t d = points.rows();
  const std::size_t n = points.cols();
  if (n < 3) throw ConfigError("PCA needs at least 3 points");
  if (d < 2) throw ConfigError("PCA needs at least 2 dimensions");

  std::vector<double> mean(d, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < d; ++i) mean[i] += points(i, j);
  for (double& m : mean) m /= static_cast<double>(n);

  Matrix centered(d, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < d; ++i) centered(i, j) = points(i, j) - mean[i];

  Matrix cov(d, d);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) cov(a, b) += centered(a, j) * centered(b, j);
  double trace = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) cov(a, b) /= static_cast<double>(n - 1);
    trace += cov(a, a);
  }

  PcaProjection out;
  out.components = Matrix(d, 2);
  out.projected = Matrix(2, n);
  if (trace <= 0.0) {
    out.rank_deficient = true;
    return out;
  }

  auto [l1, v1] = power_iteration(cov, {});
  fix_sign(v1);
  Matrix deflated = cov;
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) deflated(a, b) -= l1 * v1[a] * v1[b];
  auto [l2, v2] = power_iteration(deflated, v1);
  if (l2 <= 1e-12 * trace) {
    out.rank_deficient = true;
    l2 = 0.0;
    v2.assign(d, 0.0);
  } else {
    fix_sign(v2);
  }
  out.explained = {l1 / trace, l2 / trace};
  for (std::size_t i = 0; i < d; ++i) {
    out.components(i, 0) = v1[i];
    out.components(i, 1) = v2[i];
  }
  for (std::size_t j = 0; j < n; ++j) {
    double p1 = 0.0, p2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      p1 += v1[i] * centered(i, j);
      p2 += v2[i] * centered(i, j);
    }
    out.projected(0, j) = p1;
    out.projected(1, j) = p2;
  }
  return out;
}

}  // namespace loopsurro
