#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loopsurro/matrix.hpp"
#include "loopsurro/problems.hpp"

namespace loopsurro {

struct ToleranceSpec {
  double atol = 1e-10;
  double rtol = 1e-8;
  std::size_t max_iterations = 100;

  void validate() const;
};

enum class NewtonFailure { SingularJacobian, NonFinite, MaxIterations, DampingExhausted };

std::string to_string(NewtonFailure f);

struct NewtonResult {
  bool converged = false;
  std::vector<double> y;
  std::size_t iterations = 0;
  std::optional<NewtonFailure> failure;
  double residual_norm = 0.0;  // infinity norm at y
};

struct NewtonOptions {
  // Halve the step up to max_halvings times while ||f||_2 grows.
  bool damping = true;
  std::size_t max_halvings = 10;
  double pivot_tol = 1e-14;
};

// Newton-Raphson on f(x, .) = 0 from y0. The residual is checked before the
// first step, so an exact seed converges in zero iterations. After each step
// the iteration stops when ||f||_inf <= atol, or when every component of the
// step satisfies |dy_i| <= atol + rtol |y_i| and ||f||_inf <= atol + rtol ||y||_inf.
NewtonResult newton_solve(const ResidualSystem& system, std::span<const double> x,
                          std::span<const double> y0, const ToleranceSpec& tol,
                          const NewtonOptions& options = {});

struct IterationStats {
  double mean = 0.0;
  std::vector<std::size_t> per_sample;
  std::size_t failures = 0;
};

// newton_solve per column (in parallel); unconverged samples count as
// max_iterations.
IterationStats newton_iterations_from(const ResidualSystem& system, const Matrix& x_batch,
                                      const Matrix& y0_batch, const ToleranceSpec& tol,
                                      const NewtonOptions& options = {});

}  // namespace loopsurro
