#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "loopsurro/matrix.hpp"

namespace loopsurro {

struct Interval {
  double min = 0.0;
  double max = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Per-dimension closed box.
struct InputBounds {
  std::vector<Interval> dims;
  double margin_fraction = 0.0;

  std::size_t size() const { return dims.size(); }
  bool contains(std::span<const double> x) const;
  friend bool operator==(const InputBounds&, const InputBounds&) = default;
};

using ResidualFn =
    std::function<void(std::span<const double> x, std::span<const double> y, std::span<double> r)>;
// Writes d f / d y (n_out x n_out) into jac, which arrives correctly sized.
using JacobianFn =
    std::function<void(std::span<const double> x, std::span<const double> y, Matrix& jac)>;
using BranchFn = std::function<int(std::span<const double> x)>;

// An algebraic loop in residual form f(x, y) = 0. Implementations are pure and
// may be called concurrently.
struct ResidualSystem {
  std::string name;
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  ResidualFn residual;
  JacobianFn jacobian;
  std::optional<InputBounds> input_bounds;
  // Piecewise systems: branch_of selects an entry of `branches`, each of which
  // is the residual of one branch on its own.
  BranchFn branch_of;
  std::vector<ResidualSystem> branches;
  // Components of x that a surrogate network consumes.
  std::vector<std::size_t> feature_indices;

  std::vector<double> eval_residual(std::span<const double> x, std::span<const double> y) const;
  Matrix eval_jacobian(std::span<const double> x, std::span<const double> y) const;
  std::size_t feature_dim() const { return feature_indices.size(); }
  // Rows of `x` (n_in x N) picked by feature_indices.
  Matrix features(const Matrix& x) const;
  const ResidualSystem& branch(int id) const;
};

// Preceding and following equations around the loop. Purely algebraic
// problems have no state; ODE-coupled problems integrate `derivatives`.
struct Dynamics {
  double t0 = 0.0;
  double t1 = 1.0;
  std::vector<double> initial_state;
  std::function<void(double t, std::span<const double> state, std::span<double> x)> inputs;
  std::function<void(double t, std::span<const double> state, std::span<const double> x,
                     std::span<const double> y, std::span<double> dstate)>
      derivatives;
  std::vector<double> initial_guess;

  bool has_state() const { return !initial_state.empty(); }
  // x(t) for stateless problems.
  std::vector<double> inputs_at(double t, std::size_t n_in) const;
};

struct Problem {
  ResidualSystem system;
  Dynamics dynamics;
};

// Circle/line intersection after tearing: x = (t, r, s), y = (y),
// f = y^2 + (r s - y)^2 - r^2, with r = 1 + t and s = sqrt(0.9 (2 - t)).
Problem simpleloop();
// Both roots of the simpleloop residual, (lower, upper).
std::pair<double, double> simpleloop_roots(double r, double s);

// Square root of a + ib: f1 = y1^2 - y2^2 - a, f2 = 2 y1 y2 - b.
Problem complexsqrt();

// simpleloop with a time-conditioned fault: inside [t_on, t_off) the residual
// uses r / 2 (branch 1); elsewhere it is the simpleloop residual (branch 0).
Problem piecewiseloop(double t_on = 1.0, double t_off = 1.2);

// f(u, y) = y^3 + y - u with state du/dt = -y, u(0) = 10.
Problem cubicloop_ode();

// f(x, y) = A y + 0.1 sin(y) + B x - c, n_in = 16. A is strictly
// diagonally dominant with a margin above 0.1, so the Jacobian
// A + 0.1 diag(cos y) stays nonsingular and the solution is unique.
Problem syntheticgrid(std::size_t n_out, std::uint64_t seed);

// Registry: simpleloop, complexsqrt, piecewiseloop[:t_on:t_off], cubicloop,
// syntheticgrid:<n_out>:<seed>. Throws ConfigError for unknown names.
Problem make_problem(std::string_view name);
std::vector<std::string> problem_names();

// Central-difference Jacobian w.r.t. y, one column per perturbed component.
Matrix fd_jacobian(const ResidualSystem& system, std::span<const double> x,
                   std::span<const double> y, double h);

}  // namespace loopsurro
