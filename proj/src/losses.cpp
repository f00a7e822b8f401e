#include "loopsurro/losses.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "loopsurro/errors.hpp"

namespace loopsurro {

namespace {

void check_shapes(const ResidualSystem& system, const Matrix& x, const Matrix& yhat) {
  if (x.rows() != system.n_in || yhat.rows() != system.n_out || x.cols() != yhat.cols())
    throw ShapeError("loss: x is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                     ", yhat is " + std::to_string(yhat.rows()) + "x" +
                     std::to_string(yhat.cols()) + " for system " + system.name);
  if (x.cols() == 0) throw ShapeError("loss: empty batch");
}

void check_targets(const Matrix& yhat, const Matrix& y) {
  if (y.rows() != yhat.rows() || (y.cols() != yhat.cols() && y.cols() != 1))
    throw ShapeError("mse: predictions " + std::to_string(yhat.rows()) + "x" +
                     std::to_string(yhat.cols()) + " vs targets " + std::to_string(y.rows()) +
                     "x" + std::to_string(y.cols()));
  if (yhat.cols() == 0) throw ShapeError("mse: empty batch");
}

[[noreturn]] void non_finite(std::size_t column) {
  throw DivergedError("non-finite residual at sample " + std::to_string(column));
}

// Per-column squared residual norms and, when grad is non-null, J^T f / n.
double residual_pass(const ResidualSystem& system, const Matrix& x, const Matrix& yhat,
                     Matrix* grad) {
  check_shapes(system, x, yhat);
  const std::size_t n = x.cols();
  const std::size_t m = system.n_out;
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> sq(n, 0.0);
  std::vector<unsigned char> bad(n, 0);
  if (grad) *grad = Matrix(m, n);
#pragma omp parallel if (n * m > 64)
  {
    std::vector<double> f(m);
    Matrix jac(m, m);
#pragma omp for schedule(static)
    for (std::size_t j = 0; j < n; ++j) {
      system.residual(x.col(j), yhat.col(j), f);
      double s = 0.0;
      for (double v : f) s += v * v;
      if (!std::isfinite(s)) {
        bad[j] = 1;
        continue;
      }
      sq[j] = s;
      if (grad) {
        system.jacobian(x.col(j), yhat.col(j), jac);
        auto g = grad->col(j);
        for (std::size_t c = 0; c < m; ++c) {
          double acc = 0.0;
          for (std::size_t r = 0; r < m; ++r) acc += jac(r, c) * f[r];
          g[c] = acc * inv_n;
        }
      }
    }
  }
  for (std::size_t j = 0; j < n; ++j)
    if (bad[j]) non_finite(j);
  if (grad && !grad->all_finite()) {
    for (std::size_t j = 0; j < n; ++j)
      for (double v : grad->col(j))
        if (!std::isfinite(v)) throw DivergedError("non-finite gradient at sample " + std::to_string(j));
  }
  return 0.5 * inv_n * pairwise_sum(sq);
}

}  // namespace

double residual_loss(const ResidualSystem& system, const Matrix& x, const Matrix& yhat) {
  return residual_pass(system, x, yhat, nullptr);
}

Matrix residual_loss_gradient(const ResidualSystem& system, const Matrix& x, const Matrix& yhat) {
  Matrix g;
  residual_pass(system, x, yhat, &g);
  return g;
}

double residual_loss_and_gradient(const ResidualSystem& system, const Matrix& x,
                                  const Matrix& yhat, Matrix& grad) {
  return residual_pass(system, x, yhat, &grad);
}

double mse_loss(const Matrix& yhat, const Matrix& y) {
  check_targets(yhat, y);
  const std::size_t n = yhat.cols();
  const bool broadcast = y.cols() == 1 && n != 1;
  std::vector<double> sq(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto t = y.col(broadcast ? 0 : j);
    const auto p = yhat.col(j);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double d = p[i] - t[i];
      s += d * d;
    }
    sq[j] = s;
  }
  return 0.5 / static_cast<double>(n) * pairwise_sum(sq);
}

Matrix mse_loss_gradient(const Matrix& yhat, const Matrix& y) {
  check_targets(yhat, y);
  const std::size_t n = yhat.cols();
  const bool broadcast = y.cols() == 1 && n != 1;
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix g(yhat.rows(), n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto t = y.col(broadcast ? 0 : j);
    for (std::size_t i = 0; i < yhat.rows(); ++i) g(i, j) = (yhat(i, j) - t[i]) * inv_n;
  }
  return g;
}

namespace {

void check_lambda(double lambda, const Matrix* y) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw ConfigError("lambda must lie in [0, 1], got " + std::to_string(lambda));
  if (lambda < 1.0 && y == nullptr)
    throw ConsistencyError("semi-supervised loss with lambda < 1 needs targets");
}

}  // namespace

double semi_supervised_loss(const ResidualSystem& system, const Matrix& x, const Matrix& yhat,
                            const Matrix* y, double lambda) {
  check_lambda(lambda, y);
  if (lambda == 1.0) return residual_loss(system, x, yhat);
  if (lambda == 0.0) {
    check_shapes(system, x, yhat);
    return mse_loss(yhat, *y);
  }
  return lambda * residual_loss(system, x, yhat) + (1.0 - lambda) * mse_loss(yhat, *y);
}

double semi_supervised_loss_and_gradient(const ResidualSystem& system, const Matrix& x,
                                         const Matrix& yhat, const Matrix* y, double lambda,
                                         Matrix& grad) {
  check_lambda(lambda, y);
  if (lambda == 1.0) return residual_loss_and_gradient(system, x, yhat, grad);
  if (lambda == 0.0) {
    check_shapes(system, x, yhat);
    grad = mse_loss_gradient(yhat, *y);
    return mse_loss(yhat, *y);
  }
  Matrix g_res;
  const double l_res = residual_loss_and_gradient(system, x, yhat, g_res);
  const Matrix g_mse = mse_loss_gradient(yhat, *y);
  grad = Matrix(yhat.rows(), yhat.cols());
  for (std::size_t k = 0; k < grad.size(); ++k)
    grad.data()[k] = lambda * g_res.data()[k] + (1.0 - lambda) * g_mse.data()[k];
  return lambda * l_res + (1.0 - lambda) * mse_loss(yhat, *y);
}

Matrix semi_supervised_loss_gradient(const ResidualSystem& system, const Matrix& x,
                                     const Matrix& yhat, const Matrix* y, double lambda) {
  Matrix g;
  semi_supervised_loss_and_gradient(system, x, yhat, y, lambda, g);
  return g;
}

}  // namespace loopsurro
