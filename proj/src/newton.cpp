#include "loopsurro/newton.hpp"

#include <cmath>

#include "loopsurro/errors.hpp"
#include "loopsurro/linalg.hpp"

namespace loopsurro {

void ToleranceSpec::validate() const {
  if (!(atol >= 0.0) || !(rtol >= 0.0) || !(atol + rtol > 0.0))
    throw ConfigError("tolerances must be non-negative with atol + rtol > 0");
  if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
}

std::string to_string(NewtonFailure f) {
  switch (f) {
    case NewtonFailure::SingularJacobian: return "singular-jacobian";
    case NewtonFailure::NonFinite: return "non-finite";
    case NewtonFailure::MaxIterations: return "max-iterations";
    case NewtonFailure::DampingExhausted: return "damping-exhausted";
  }
  return "unknown";
}

namespace {

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

NewtonResult newton_solve(const ResidualSystem& system, std::span<const double> x,
                          std::span<const double> y0, const ToleranceSpec& tol,
                          const NewtonOptions& options) {
  tol.validate();
  const std::size_t n = system.n_out;
  if (x.size() != system.n_in || y0.size() != n)
    throw ShapeError(system.name + ": newton_solve got wrong x/y0 lengths");

  NewtonResult res;
  res.y.assign(y0.begin(), y0.end());
  std::vector<double> r(n), r_trial(n), y_trial(n), step(n);
  Matrix jac(n, n);

  system.residual(x, res.y, r);
  if (!all_finite(r) || !all_finite(res.y)) {
    res.failure = NewtonFailure::NonFinite;
    res.residual_norm = max_abs(r);
    return res;
  }
  res.residual_norm = max_abs(r);
  if (res.residual_norm <= tol.atol) {
    res.converged = true;
    return res;
  }

  for (std::size_t k = 1; k <= tol.max_iterations; ++k) {
    system.jacobian(x, res.y, jac);
    if (!jac.all_finite()) {
      res.failure = NewtonFailure::NonFinite;
      return res;
    }
    const auto lu = LuFactorization::factor(jac, options.pivot_tol);
    if (!lu) {
      res.failure = NewtonFailure::SingularJacobian;
      return res;
    }
    std::copy(r.begin(), r.end(), step.begin());
    lu->solve_in_place(step);
    if (!all_finite(step)) {
      res.failure = NewtonFailure::NonFinite;
      return res;
    }

    const double norm_before = norm2(r);
    double lambda = 1.0;
    auto try_step = [&] {
      for (std::size_t i = 0; i < n; ++i) y_trial[i] = res.y[i] - lambda * step[i];
      system.residual(x, y_trial, r_trial);
    };
    try_step();
    if (options.damping) {
      std::size_t halvings = 0;
      while (!(all_finite(r_trial) && norm2(r_trial) <= norm_before) &&
             halvings < options.max_halvings) {
        lambda *= 0.5;
        ++halvings;
        try_step();
      }
      if (all_finite(r_trial) && norm2(r_trial) > norm_before) {
        res.iterations = k;
        res.failure = NewtonFailure::DampingExhausted;
        return res;
      }
    }
    if (!all_finite(r_trial)) {
      res.iterations = k;
      res.failure = NewtonFailure::NonFinite;
      return res;
    }

    bool small_step = true;
    for (std::size_t i = 0; i < n; ++i)
      if (!(std::abs(lambda * step[i]) <= tol.atol + tol.rtol * std::abs(res.y[i])))
        small_step = false;
    res.y.swap(y_trial);
    r.swap(r_trial);
    res.iterations = k;
    res.residual_norm = max_abs(r);
    if (res.residual_norm <= tol.atol ||
        (small_step && res.residual_norm <= tol.atol + tol.rtol * max_abs(res.y))) {
      res.converged = true;
      return res;
    }
  }
  res.failure = NewtonFailure::MaxIterations;
  return res;
}

IterationStats newton_iterations_from(const ResidualSystem& system, const Matrix& x_batch,
                                      const Matrix& y0_batch, const ToleranceSpec& tol,
                                      const NewtonOptions& options) {
  if (x_batch.cols() == 0) throw ConfigError("newton_iterations_from: empty batch");
  if (x_batch.cols() != y0_batch.cols() || x_batch.rows() != system.n_in ||
      y0_batch.rows() != system.n_out)
    throw ShapeError("newton_iterations_from: batch shapes disagree");
  tol.validate();
  const auto n = static_cast<std::ptrdiff_t>(x_batch.cols());
  IterationStats stats;
  stats.per_sample.assign(x_batch.cols(), 0);
  std::vector<unsigned char> failed(x_batch.cols(), 0);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    const auto res = newton_solve(system, x_batch.col(j), y0_batch.col(j), tol, options);
    if (res.converged) {
      stats.per_sample[j] = res.iterations;
    } else {
      stats.per_sample[j] = tol.max_iterations;
      failed[j] = 1;
    }
  }
  double total = 0.0;
  for (std::size_t j = 0; j < stats.per_sample.size(); ++j) {
    total += static_cast<double>(stats.per_sample[j]);
    stats.failures += failed[j];
  }
  stats.mean = total / static_cast<double>(n);
  return stats;
}

}  // namespace loopsurro
