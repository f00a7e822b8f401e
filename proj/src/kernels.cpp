#include "loopsurro/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <string>

#include "loopsurro/errors.hpp"

namespace loopsurro::kernels {

namespace {

std::atomic<Exec> g_default_exec{Exec::Parallel};

constexpr std::ptrdiff_t kColumnBlock = 4;

void check(bool ok, const char* what) {
  if (!ok) throw ShapeError(std::string("kernels: shape mismatch in ") + what);
}

void affine_serial(const Matrix& w, std::span<const double> b, const Matrix& x, Matrix& z) {
  const std::size_t m = w.rows(), k = w.cols(), n = x.cols();
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) {
      double s = b[i];
      for (std::size_t p = 0; p < k; ++p) s += w(i, p) * x(p, j);
      z(i, j) = s;
    }
}

void affine_parallel(const Matrix& w, std::span<const double> b, const Matrix& x, Matrix& z) {
  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(w.rows());
  const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(w.cols());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.cols());
  const std::ptrdiff_t blocks = (n + kColumnBlock - 1) / kColumnBlock;
  const double* wd = w.data();
  const double* xd = x.data();
  double* zd = z.data();

#pragma omp parallel for schedule(static) if (n * m * k > 32768)
  for (std::ptrdiff_t blk = 0; blk < blocks; ++blk) {
    const std::ptrdiff_t j0 = blk * kColumnBlock;
    const std::ptrdiff_t width = std::min(kColumnBlock, n - j0);
    for (std::ptrdiff_t jj = 0; jj < width; ++jj) {
      double* zc = zd + (j0 + jj) * m;
      for (std::ptrdiff_t i = 0; i < m; ++i) zc[i] = b[i];
    }
    if (width == kColumnBlock) {
      double* z0 = zd + (j0 + 0) * m;
      double* z1 = zd + (j0 + 1) * m;
      double* z2 = zd + (j0 + 2) * m;
      double* z3 = zd + (j0 + 3) * m;
      for (std::ptrdiff_t p = 0; p < k; ++p) {
        const double* wc = wd + p * m;
        const double x0 = xd[(j0 + 0) * k + p];
        const double x1 = xd[(j0 + 1) * k + p];
        const double x2 = xd[(j0 + 2) * k + p];
        const double x3 = xd[(j0 + 3) * k + p];
#pragma omp simd
        for (std::ptrdiff_t i = 0; i < m; ++i) {
          const double wi = wc[i];
          z0[i] += wi * x0;
          z1[i] += wi * x1;
          z2[i] += wi * x2;
          z3[i] += wi * x3;
        }
      }
    } else {
      for (std::ptrdiff_t jj = 0; jj < width; ++jj) {
        double* zc = zd + (j0 + jj) * m;
        for (std::ptrdiff_t p = 0; p < k; ++p) {
          const double* wc = wd + p * m;
          const double xv = xd[(j0 + jj) * k + p];
#pragma omp simd
          for (std::ptrdiff_t i = 0; i < m; ++i) zc[i] += wc[i] * xv;
        }
      }
    }
  }
}

void weight_grad_serial(const Matrix& dz, const Matrix& x, Matrix& dw, std::span<double> db) {
  const std::size_t m = dz.rows(), k = x.rows(), n = dz.cols();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += dz(i, j) * x(p, j);
      dw(i, p) = s;
    }
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += dz(i, j);
    db[i] = s;
  }
}

void weight_grad_parallel(const Matrix& dz, const Matrix& x, Matrix& dw, std::span<double> db) {
  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(dz.rows());
  const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(x.rows());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(dz.cols());
  const double* dzd = dz.data();
  const double* xd = x.data();
  double* dwd = dw.data();
  const std::ptrdiff_t blocks = (k + kColumnBlock - 1) / kColumnBlock;

  // Each thread owns whole columns of dw, so the sum over the batch runs in
  // sample order exactly as in the serial kernel.
#pragma omp parallel for schedule(static) if (n * m * k > 32768)
  for (std::ptrdiff_t blk = 0; blk < blocks; ++blk) {
    const std::ptrdiff_t p0 = blk * kColumnBlock;
    const std::ptrdiff_t width = std::min(kColumnBlock, k - p0);
    for (std::ptrdiff_t pp = 0; pp < width; ++pp) {
      double* dc = dwd + (p0 + pp) * m;
      for (std::ptrdiff_t i = 0; i < m; ++i) dc[i] = 0.0;
    }
    if (width == kColumnBlock) {
      double* d0 = dwd + (p0 + 0) * m;
      double* d1 = dwd + (p0 + 1) * m;
      double* d2 = dwd + (p0 + 2) * m;
      double* d3 = dwd + (p0 + 3) * m;
      for (std::ptrdiff_t j = 0; j < n; ++j) {
        const double* g = dzd + j * m;
        const double x0 = xd[j * k + p0 + 0];
        const double x1 = xd[j * k + p0 + 1];
        const double x2 = xd[j * k + p0 + 2];
        const double x3 = xd[j * k + p0 + 3];
#pragma omp simd
        for (std::ptrdiff_t i = 0; i < m; ++i) {
          const double gi = g[i];
          d0[i] += gi * x0;
          d1[i] += gi * x1;
          d2[i] += gi * x2;
          d3[i] += gi * x3;
        }
      }
    } else {
      for (std::ptrdiff_t pp = 0; pp < width; ++pp) {
        double* dc = dwd + (p0 + pp) * m;
        for (std::ptrdiff_t j = 0; j < n; ++j) {
          const double* g = dzd + j * m;
          const double xv = xd[j * k + p0 + pp];
#pragma omp simd
          for (std::ptrdiff_t i = 0; i < m; ++i) dc[i] += g[i] * xv;
        }
      }
    }
  }

  for (std::ptrdiff_t i = 0; i < m; ++i) db[i] = 0.0;
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    const double* g = dzd + j * m;
#pragma omp simd
    for (std::ptrdiff_t i = 0; i < m; ++i) db[i] += g[i];
  }
}

void input_grad_serial(const Matrix& w, const Matrix& dz, Matrix& dx) {
  const std::size_t m = w.rows(), k = w.cols(), n = dz.cols();
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t p = 0; p < k; ++p) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += w(i, p) * dz(i, j);
      dx(p, j) = s;
    }
}

void input_grad_parallel(const Matrix& w, const Matrix& dz, Matrix& dx) {
  // With w transposed, each output column becomes a sequence of axpys over the
  // rows of w, which vectorizes without reassociating the sum.
  const Matrix wt = w.transposed();
  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(w.rows());
  const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(w.cols());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(dz.cols());
  const double* wtd = wt.data();
  const double* dzd = dz.data();
  double* dxd = dx.data();
  const std::ptrdiff_t blocks = (n + kColumnBlock - 1) / kColumnBlock;

#pragma omp parallel for schedule(static) if (n * m * k > 32768)
  for (std::ptrdiff_t blk = 0; blk < blocks; ++blk) {
    const std::ptrdiff_t j0 = blk * kColumnBlock;
    const std::ptrdiff_t width = std::min(kColumnBlock, n - j0);
    for (std::ptrdiff_t jj = 0; jj < width; ++jj) {
      double* dc = dxd + (j0 + jj) * k;
      for (std::ptrdiff_t p = 0; p < k; ++p) dc[p] = 0.0;
    }
    if (width == kColumnBlock) {
      double* d0 = dxd + (j0 + 0) * k;
      double* d1 = dxd + (j0 + 1) * k;
      double* d2 = dxd + (j0 + 2) * k;
      double* d3 = dxd + (j0 + 3) * k;
      for (std::ptrdiff_t i = 0; i < m; ++i) {
        const double* wr = wtd + i * k;
        const double g0 = dzd[(j0 + 0) * m + i];
        const double g1 = dzd[(j0 + 1) * m + i];
        const double g2 = dzd[(j0 + 2) * m + i];
        const double g3 = dzd[(j0 + 3) * m + i];
#pragma omp simd
        for (std::ptrdiff_t p = 0; p < k; ++p) {
          const double wv = wr[p];
          d0[p] += wv * g0;
          d1[p] += wv * g1;
          d2[p] += wv * g2;
          d3[p] += wv * g3;
        }
      }
    } else {
      for (std::ptrdiff_t jj = 0; jj < width; ++jj) {
        double* dc = dxd + (j0 + jj) * k;
        for (std::ptrdiff_t i = 0; i < m; ++i) {
          const double* wr = wtd + i * k;
          const double g = dzd[(j0 + jj) * m + i];
#pragma omp simd
          for (std::ptrdiff_t p = 0; p < k; ++p) dc[p] += wr[p] * g;
        }
      }
    }
  }
}

}  // namespace

void set_default_exec(Exec exec) { g_default_exec.store(exec); }
Exec default_exec() { return g_default_exec.load(); }

void affine(const Matrix& w, std::span<const double> b, const Matrix& x, Matrix& z, Exec exec) {
  check(x.rows() == w.cols(), "affine (x rows vs w cols)");
  check(b.size() == w.rows(), "affine (bias length)");
  if (z.rows() != w.rows() || z.cols() != x.cols()) z = Matrix(w.rows(), x.cols());
  if (exec == Exec::Serial)
    affine_serial(w, b, x, z);
  else
    affine_parallel(w, b, x, z);
}

void weight_grad(const Matrix& dz, const Matrix& x, Matrix& dw, std::span<double> db, Exec exec) {
  check(dz.cols() == x.cols(), "weight_grad (batch size)");
  check(dw.rows() == dz.rows() && dw.cols() == x.rows(), "weight_grad (dw shape)");
  check(db.size() == dz.rows(), "weight_grad (db length)");
  if (exec == Exec::Serial)
    weight_grad_serial(dz, x, dw, db);
  else
    weight_grad_parallel(dz, x, dw, db);
}

void input_grad(const Matrix& w, const Matrix& dz, Matrix& dx, Exec exec) {
  check(dz.rows() == w.rows(), "input_grad (dz rows vs w rows)");
  if (dx.rows() != w.cols() || dx.cols() != dz.cols()) dx = Matrix(w.cols(), dz.cols());
  if (exec == Exec::Serial)
    input_grad_serial(w, dz, dx);
  else
    input_grad_parallel(w, dz, dx);
}

void relu_inplace(Matrix& z) {
  for (double& v : z.values()) v = v > 0.0 ? v : 0.0;
}

void relu_mask(const Matrix& pre, Matrix& grad) {
  check(pre.rows() == grad.rows() && pre.cols() == grad.cols(), "relu_mask");
  const auto p = pre.values();
  auto g = grad.values();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(p[i] > 0.0)) g[i] = 0.0;
}

}  // namespace loopsurro::kernels
