#include "loopsurro/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "loopsurro/errors.hpp"
#include "loopsurro/rng.hpp"

namespace loopsurro {

bool InputBounds::contains(std::span<const double> x) const {
  if (x.size() != dims.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] >= dims[i].min && x[i] <= dims[i].max)) return false;
  return true;
}

std::vector<double> ResidualSystem::eval_residual(std::span<const double> x,
                                                  std::span<const double> y) const {
  std::vector<double> r(n_out);
  residual(x, y, r);
  return r;
}

Matrix ResidualSystem::eval_jacobian(std::span<const double> x, std::span<const double> y) const {
  Matrix j(n_out, n_out);
  jacobian(x, y, j);
  return j;
}

Matrix ResidualSystem::features(const Matrix& x) const {
  if (x.rows() != n_in) throw ShapeError(name + ": input batch has wrong row count");
  return x.select_rows(feature_indices);
}

const ResidualSystem& ResidualSystem::branch(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= branches.size())
    throw SelectionError(name + ": no branch " + std::to_string(id));
  return branches[static_cast<std::size_t>(id)];
}

std::vector<double> Dynamics::inputs_at(double t, std::size_t n_in) const {
  std::vector<double> x(n_in);
  inputs(t, initial_state, x);
  return x;
}

namespace {

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

// Shared by simpleloop and both piecewiseloop branches; radius_scale = 1/2
// models the fault.
ResidualSystem circle_line_system(std::string name, double radius_scale) {
  ResidualSystem s;
  s.name = std::move(name);
  s.n_in = 3;
  s.n_out = 1;
  s.residual = [radius_scale](std::span<const double> x, std::span<const double> y,
                              std::span<double> r) {
    const double rad = radius_scale * x[1], sv = x[2];
    const double other = rad * sv - y[0];
    r[0] = y[0] * y[0] + other * other - rad * rad;
  };
  s.jacobian = [radius_scale](std::span<const double> x, std::span<const double> y, Matrix& j) {
    j(0, 0) = 4.0 * y[0] - 2.0 * radius_scale * x[1] * x[2];
  };
  s.feature_indices = {1, 2};
  return s;
}

void circle_line_inputs(double t, std::span<const double>, std::span<double> x) {
  x[0] = t;
  x[1] = 1.0 + t;
  x[2] = std::sqrt(std::max(0.0, 0.9 * (2.0 - t)));
}

}  // namespace

Problem simpleloop() {
  Problem p;
  p.system = circle_line_system("simpleloop", 1.0);
  p.system.input_bounds = InputBounds{{{0.0, 2.0}, {1.0, 3.0}, {0.0, std::sqrt(1.8)}}, 0.0};
  p.dynamics.t0 = 0.0;
  p.dynamics.t1 = 2.0;
  p.dynamics.inputs = circle_line_inputs;
  p.dynamics.initial_guess = {1.0};
  return p;
}

std::pair<double, double> simpleloop_roots(double r, double s) {
  const double disc = std::sqrt(std::max(0.0, 2.0 - s * s));
  return {0.5 * r * (s - disc), 0.5 * r * (s + disc)};
}

Problem complexsqrt() {
  Problem p;
  auto& s = p.system;
  s.name = "complexsqrt";
  s.n_in = 2;
  s.n_out = 2;
  s.residual = [](std::span<const double> x, std::span<const double> y, std::span<double> r) {
    r[0] = y[0] * y[0] - y[1] * y[1] - x[0];
    r[1] = 2.0 * y[0] * y[1] - x[1];
  };
  s.jacobian = [](std::span<const double>, std::span<const double> y, Matrix& j) {
    j(0, 0) = 2.0 * y[0];
    j(0, 1) = -2.0 * y[1];
    j(1, 0) = 2.0 * y[1];
    j(1, 1) = 2.0 * y[0];
  };
  s.feature_indices = {0, 1};
  s.input_bounds = InputBounds{{{-2.0, 2.0}, {-2.0, 2.0}}, 0.0};
  // Unit circle once around the origin; crosses the negative real axis at t = 1.
  p.dynamics.t0 = 0.0;
  p.dynamics.t1 = 2.0;
  p.dynamics.inputs = [](double t, std::span<const double>, std::span<double> x) {
    x[0] = std::cos(std::numbers::pi * t);
    x[1] = std::sin(std::numbers::pi * t);
  };
  p.dynamics.initial_guess = {1.0, 0.0};
  return p;
}

Problem piecewiseloop(double t_on, double t_off) {
  if (!(t_on < t_off)) throw ConfigError("piecewiseloop: fault window needs t_on < t_off");
  Problem p;
  ResidualSystem off = circle_line_system("piecewiseloop[fault-off]", 1.0);
  ResidualSystem on = circle_line_system("piecewiseloop[fault-on]", 0.5);
  auto branch_of = [t_on, t_off](std::span<const double> x) {
    return (x[0] >= t_on && x[0] < t_off) ? 1 : 0;
  };
  auto& s = p.system;
  s.name = "piecewiseloop";
  s.n_in = 3;
  s.n_out = 1;
  s.residual = [off, on, branch_of](std::span<const double> x, std::span<const double> y,
                                    std::span<double> r) {
    (branch_of(x) == 1 ? on : off).residual(x, y, r);
  };
  s.jacobian = [off, on, branch_of](std::span<const double> x, std::span<const double> y,
                                    Matrix& j) { (branch_of(x) == 1 ? on : off).jacobian(x, y, j); };
  s.branch_of = branch_of;
  s.branches = {off, on};
  s.feature_indices = {1, 2};
  s.input_bounds = InputBounds{{{0.0, 2.0}, {1.0, 3.0}, {0.0, std::sqrt(1.8)}}, 0.0};
  p.dynamics.t0 = 0.0;
  p.dynamics.t1 = 2.0;
  p.dynamics.inputs = circle_line_inputs;
  p.dynamics.initial_guess = {1.0};
  return p;
}

Problem cubicloop_ode() {
  Problem p;
  auto& s = p.system;
  s.name = "cubicloop";
  s.n_in = 1;
  s.n_out = 1;
  s.residual = [](std::span<const double> x, std::span<const double> y, std::span<double> r) {
    r[0] = y[0] * y[0] * y[0] + y[0] - x[0];
  };
  s.jacobian = [](std::span<const double>, std::span<const double> y, Matrix& j) {
    j(0, 0) = 3.0 * y[0] * y[0] + 1.0;
  };
  s.feature_indices = {0};
  p.dynamics.t0 = 0.0;
  p.dynamics.t1 = 2.0;
  p.dynamics.initial_state = {10.0};
  p.dynamics.inputs = [](double, std::span<const double> state, std::span<double> x) {
    x[0] = state[0];
  };
  p.dynamics.derivatives = [](double, std::span<const double>, std::span<const double>,
                              std::span<const double> y, std::span<double> dstate) {
    dstate[0] = -y[0];
  };
  p.dynamics.initial_guess = {0.0};
  return p;
}

namespace {

// Coefficient magnitudes of the synthetic stand-in system.
constexpr double kGridOffDiagonal = 0.02;  // |A_ij| <= this for i != j
constexpr double kGridMarginLo = 0.02;     // A_ii - sum_j |A_ij| - 0.1 in [lo, 2 lo]
constexpr double kGridCoupling = 0.01;     // |B_ij| <= this
constexpr double kGridOffset = 4.0;        // |c_i| <= this
constexpr double kGridInputAmplitude = 0.9;

}  // namespace

Problem syntheticgrid(std::size_t n_out, std::uint64_t seed) {
  if (n_out < 2) throw ConfigError("syntheticgrid: n_out must be at least 2");
  constexpr std::size_t n_in = 16;
  Rng rng(seed);
  Matrix a(n_out, n_out), b(n_out, n_in);
  std::vector<double> c(n_out);
  for (std::size_t i = 0; i < n_out; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n_out; ++j) {
      if (i == j) continue;
      a(i, j) = rng.uniform(-kGridOffDiagonal, kGridOffDiagonal);
      row += std::abs(a(i, j));
    }
    a(i, i) = row + 0.1 + rng.uniform(kGridMarginLo, 2.0 * kGridMarginLo);
  }
  for (double& v : b.values()) v = rng.uniform(-kGridCoupling, kGridCoupling);
  for (double& v : c) v = rng.uniform(-kGridOffset, kGridOffset);
  std::vector<double> omega(n_in), phase(n_in);
  for (std::size_t j = 0; j < n_in; ++j) {
    omega[j] = rng.uniform(0.5, 3.0);
    phase[j] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }

  Problem p;
  auto& s = p.system;
  s.name = "syntheticgrid:" + std::to_string(n_out) + ":" + std::to_string(seed);
  s.n_in = n_in;
  s.n_out = n_out;
  s.residual = [a, b, c](std::span<const double> x, std::span<const double> y,
                         std::span<double> r) {
    const std::size_t n = a.rows();
    for (std::size_t i = 0; i < n; ++i) r[i] = 0.1 * std::sin(y[i]) - c[i];
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) r[i] += a(i, j) * y[j];
    for (std::size_t j = 0; j < b.cols(); ++j)
      for (std::size_t i = 0; i < n; ++i) r[i] += b(i, j) * x[j];
  };
  s.jacobian = [a](std::span<const double>, std::span<const double> y, Matrix& j) {
    j = a;
    for (std::size_t i = 0; i < a.rows(); ++i) j(i, i) += 0.1 * std::cos(y[i]);
  };
  s.feature_indices = iota_indices(n_in);
  s.input_bounds = InputBounds{
      std::vector<Interval>(n_in, Interval{-kGridInputAmplitude, kGridInputAmplitude}), 0.0};
  p.dynamics.t0 = 0.0;
  p.dynamics.t1 = 2.0;
  p.dynamics.inputs = [omega, phase](double t, std::span<const double>, std::span<double> x) {
    for (std::size_t j = 0; j < omega.size(); ++j)
      x[j] = kGridInputAmplitude * std::sin(omega[j] * t + phase[j]);
  };
  p.dynamics.initial_guess.assign(n_out, 0.0);
  return p;
}

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view text, std::string_view what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError("bad " + std::string(what) + " '" + std::string(text) + "'");
  return value;
}

}  // namespace

Problem make_problem(std::string_view name) {
  const auto parts = split(name, ':');
  const auto head = parts.front();
  if (head == "simpleloop" && parts.size() == 1) return simpleloop();
  if (head == "complexsqrt" && parts.size() == 1) return complexsqrt();
  if (head == "cubicloop" && parts.size() == 1) return cubicloop_ode();
  if (head == "piecewiseloop") {
    if (parts.size() == 1) return piecewiseloop();
    if (parts.size() == 3)
      return piecewiseloop(parse_number<double>(parts[1], "t_on"),
                           parse_number<double>(parts[2], "t_off"));
  }
  if (head == "syntheticgrid" && parts.size() == 3)
    return syntheticgrid(parse_number<std::size_t>(parts[1], "n_out"),
                         parse_number<std::uint64_t>(parts[2], "seed"));
  throw ConfigError("unknown problem '" + std::string(name) +
                    "' (expected simpleloop, complexsqrt, piecewiseloop[:t_on:t_off], cubicloop "
                    "or syntheticgrid:<n_out>:<seed>)");
}

std::vector<std::string> problem_names() {
  return {"simpleloop", "complexsqrt", "piecewiseloop", "cubicloop", "syntheticgrid:<n_out>:<seed>"};
}

Matrix fd_jacobian(const ResidualSystem& system, std::span<const double> x,
                   std::span<const double> y, double h) {
  if (!(h > 0.0)) throw ConfigError("fd_jacobian: step must be positive");
  const std::size_t n = system.n_out;
  Matrix jac(n, n);
  std::vector<double> yp(y.begin(), y.end()), rp(n), rm(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double orig = yp[k];
    yp[k] = orig + h;
    system.residual(x, yp, rp);
    yp[k] = orig - h;
    system.residual(x, yp, rm);
    yp[k] = orig;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(rp[i]) || !std::isfinite(rm[i]))
        throw EvaluationError(system.name + ": non-finite residual while differencing component " +
                              std::to_string(k));
      jac(i, k) = (rp[i] - rm[i]) / (2.0 * h);
    }
  }
  return jac;
}

}  // namespace loopsurro
