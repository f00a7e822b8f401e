#include "loopsurro/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "loopsurro/errors.hpp"
#include "loopsurro/textio.hpp"
#include "loopsurro/training.hpp"

namespace loopsurro {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<double> time_grid(const SimConfig& c) {
  std::vector<double> t(c.num_steps + 1);
  for (std::size_t k = 0; k <= c.num_steps; ++k)
    t[k] = c.t0 + (c.t1 - c.t0) * static_cast<double>(k) / static_cast<double>(c.num_steps);
  t.back() = c.t1;
  return t;
}

// Owns the loop-external state: x(t) and, for ODE-coupled problems, the
// explicit Euler update.
class Stepper {
 public:
  Stepper(const Problem& p, const SimConfig& c)
      : problem_(p), state_(p.dynamics.initial_state), h_((c.t1 - c.t0) / c.num_steps) {
    if (!problem_.dynamics.inputs) throw ConfigError("problem has no input equations");
  }

  std::vector<double> inputs(double t) const {
    std::vector<double> x(problem_.system.n_in);
    problem_.dynamics.inputs(t, state_, x);
    return x;
  }

  void advance(double t, std::span<const double> x, std::span<const double> y) {
    if (!problem_.dynamics.has_state()) return;
    std::vector<double> d(state_.size());
    problem_.dynamics.derivatives(t, state_, x, y, d);
    for (std::size_t i = 0; i < d.size(); ++i) state_[i] += h_ * d[i];
  }

 private:
  const Problem& problem_;
  std::vector<double> state_;
  double h_;
};

std::vector<double> start_guess(const Problem& p, const SimConfig& c) {
  const auto& g = c.initial_guess.empty() ? p.dynamics.initial_guess : c.initial_guess;
  if (g.size() != p.system.n_out) throw ConfigError("initial guess has the wrong dimension");
  return g;
}

Trajectory empty_trajectory(const Problem& p, const std::vector<double>& times) {
  Trajectory tr;
  tr.times = times;
  tr.x_values = Matrix(p.system.n_in, times.size());
  tr.y_values = Matrix(p.system.n_out, times.size());
  return tr;
}

[[noreturn]] void step_failure(std::size_t k, double t, const NewtonResult& r) {
  throw SimulationError("Newton failed at step " + std::to_string(k) + " (t = " +
                        format_double(t) + "): " +
                        (r.failure ? to_string(*r.failure) : std::string("not converged")));
}

}  // namespace

void SimConfig::validate() const {
  if (!(t1 > t0)) throw ConfigError("simulation needs t0 < t1");
  if (num_steps < 1) throw ConfigError("simulation needs at least one step");
  newton_tol.validate();
  fallback_tol.validate();
}

SimConfig SimConfig::for_problem(const Problem& problem, std::size_t num_steps) {
  SimConfig c;
  c.t0 = problem.dynamics.t0;
  c.t1 = problem.dynamics.t1;
  c.num_steps = num_steps;
  c.initial_guess = problem.dynamics.initial_guess;
  return c;
}

std::string to_string(StepSource s) {
  switch (s) {
    case StepSource::Surrogate: return "surrogate";
    case StepSource::Fallback: return "fallback";
    case StepSource::Newton: return "newton";
  }
  return "?";
}

std::size_t Trajectory::total_iterations() const {
  std::size_t s = 0;
  for (auto i : iterations) s += i;
  return s;
}

std::size_t Trajectory::fallback_count() const {
  std::size_t s = 0;
  for (auto src : sources) s += src == StepSource::Fallback ? 1 : 0;
  return s;
}

void Trajectory::save_csv(const std::string& path, const std::string& manifest_hash) const {
  CsvTable t;
  if (!manifest_hash.empty()) t.comments.push_back("manifest " + manifest_hash);
  t.header.push_back("t");
  for (std::size_t i = 0; i < x_values.rows(); ++i) t.header.push_back("x" + std::to_string(i));
  for (std::size_t i = 0; i < y_values.rows(); ++i) t.header.push_back("y" + std::to_string(i));
  t.header.insert(t.header.end(), {"source", "iterations", "residual_norm"});
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<std::string> row{format_double(times[k])};
    for (double v : x_values.col(k)) row.push_back(format_double(v));
    for (double v : y_values.col(k)) row.push_back(format_double(v));
    row.push_back(to_string(sources[k]));
    row.push_back(std::to_string(iterations[k]));
    row.push_back(format_double(residual_norms[k]));
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

Trajectory simulate_classical(const Problem& problem, const SimConfig& config) {
  config.validate();
  const auto& system = problem.system;
  const auto times = time_grid(config);
  Trajectory tr = empty_trajectory(problem, times);
  Stepper stepper(problem, config);
  const std::vector<double> guess = start_guess(problem, config);
  std::vector<double> y_prev = guess;

  const auto start = Clock::now();
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto x = stepper.inputs(times[k]);
    const auto& seed = (config.warm_start && k > 0) ? y_prev : guess;
    const NewtonResult r = newton_solve(system, x, seed, config.newton_tol);
    if (!r.converged) step_failure(k, times[k], r);
    std::copy(x.begin(), x.end(), tr.x_values.col(k).begin());
    std::copy(r.y.begin(), r.y.end(), tr.y_values.col(k).begin());
    tr.sources.push_back(StepSource::Newton);
    tr.iterations.push_back(r.iterations);
    tr.residual_norms.push_back(r.residual_norm);
    y_prev = r.y;
    stepper.advance(times[k], x, r.y);
  }
  tr.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  return tr;
}

Trajectory simulate_surrogate(const Problem& problem, const SurrogateBundle& bundle,
                              const SimConfig& config) {
  config.validate();
  const auto& system = problem.system;
  bundle.check_compatible(system);
  const auto times = time_grid(config);
  Trajectory tr = empty_trajectory(problem, times);
  tr.predictions = Matrix(system.n_out, times.size());
  Stepper stepper(problem, config);
  std::vector<double> previous = start_guess(problem, config);
  const auto& acc = config.fallback_tol;

  const auto start = Clock::now();
  if (bundle.selector == SelectorKind::ByCentroid) {
    const auto x0 = stepper.inputs(times[0]);
    const NewtonResult r = newton_solve(system, x0, previous, config.newton_tol);
    if (!r.converged) step_failure(0, times[0], r);
    previous = r.y;
  }

  std::vector<double> f(system.n_out);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto x = stepper.inputs(times[k]);
    std::size_t idx = 0;
    if (bundle.selector == SelectorKind::ByCentroid) idx = select_by_centroid(bundle, previous);
    else if (bundle.selector == SelectorKind::ByBranch) idx = select_by_branch(bundle, system, x);

    const Matrix xcol = Matrix::column(x);
    const Matrix pred = forward(bundle.networks[idx], system.features(xcol));
    const auto yhat = pred.col(0);
    std::copy(yhat.begin(), yhat.end(), tr.predictions.col(k).begin());

    double res = std::numeric_limits<double>::infinity();
    if (pred.all_finite()) {
      system.residual(x, yhat, f);
      res = max_abs(f);
    }
    std::vector<double> y;
    if (std::isfinite(res) && res <= acc.atol + acc.rtol * max_abs(yhat)) {
      y.assign(yhat.begin(), yhat.end());
      tr.sources.push_back(StepSource::Surrogate);
      tr.iterations.push_back(0);
      tr.residual_norms.push_back(res);
    } else {
      const std::span<const double> seed =
          pred.all_finite() ? yhat : std::span<const double>(previous);
      const NewtonResult r = newton_solve(system, x, seed, config.newton_tol);
      if (!r.converged) step_failure(k, times[k], r);
      y = r.y;
      tr.sources.push_back(StepSource::Fallback);
      tr.iterations.push_back(r.iterations);
      tr.residual_norms.push_back(r.residual_norm);
    }
    std::copy(x.begin(), x.end(), tr.x_values.col(k).begin());
    std::copy(y.begin(), y.end(), tr.y_values.col(k).begin());
    tr.selected.push_back(idx);
    previous = y;
    stepper.advance(times[k], x, y);
  }
  tr.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  tr.fallback_rate = static_cast<double>(tr.fallback_count()) / static_cast<double>(tr.steps());
  return tr;
}

TrajectoryComparison compare_trajectories(const Trajectory& a, const Trajectory& b,
                                          const ToleranceSpec& tol) {
  if (a.times != b.times) throw ShapeError("trajectories use different time grids");
  if (a.y_values.rows() != b.y_values.rows() || a.y_values.cols() != b.y_values.cols())
    throw ShapeError("trajectories have different output shapes");
  TrajectoryComparison c;
  for (std::size_t k = 0; k < a.y_values.cols(); ++k) {
    bool violated = false;
    for (std::size_t i = 0; i < a.y_values.rows(); ++i) {
      const double ya = a.y_values(i, k), yb = b.y_values(i, k);
      const double d = std::abs(ya - yb);
      c.max_abs = std::max(c.max_abs, d);
      if (d > 0.0)
        c.max_rel = std::max(c.max_rel, std::abs(ya) > 0.0
                                            ? d / std::abs(ya)
                                            : std::numeric_limits<double>::infinity());
      if (!(d <= tol.atol + tol.rtol * std::abs(ya))) violated = true;
    }
    if (violated && !c.first_violation_step) c.first_violation_step = k;
  }
  return c;
}

std::vector<BenchmarkSummary> BenchmarkReport::summary() const {
  std::vector<BenchmarkSummary> out;
  for (const auto& row : rows) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const BenchmarkSummary& s) { return s.variant == row.variant; });
    if (it == out.end()) {
      out.push_back({row.variant, 0.0, std::numeric_limits<double>::infinity(), 0.0, 0.0});
      it = out.end() - 1;
    }
    it->min_ms = std::min(it->min_ms, row.wall_ms);
  }
  for (auto& s : out) {
    std::vector<double> ms, iters, rates;
    for (const auto& row : rows)
      if (row.variant == s.variant) {
        ms.push_back(row.wall_ms);
        iters.push_back(static_cast<double>(row.total_newton_iters));
        rates.push_back(row.fallback_rate);
      }
    const double n = static_cast<double>(ms.size());
    s.mean_ms = pairwise_sum(ms) / n;
    s.mean_newton_iters = pairwise_sum(iters) / n;
    s.mean_fallback_rate = pairwise_sum(rates) / n;
  }
  return out;
}

void BenchmarkReport::save_csv(const std::string& path, const std::string& manifest_hash) const {
  CsvTable t;
  if (!manifest_hash.empty()) t.comments.push_back("manifest " + manifest_hash);
  t.header = {"variant", "run", "wall_ms", "total_newton_iters", "fallback_rate"};
  for (const auto& r : rows)
    t.rows.push_back({r.variant, std::to_string(r.run), format_double(r.wall_ms),
                      std::to_string(r.total_newton_iters), format_double(r.fallback_rate)});
  write_csv(path, t);
}

BenchmarkReport benchmark(const Problem& problem, const std::vector<BenchmarkVariant>& variants,
                          const SimConfig& config, std::size_t repeats) {
  if (repeats == 0) throw ConfigError("benchmark needs at least one repeat");
  BenchmarkReport report;
  for (const auto& v : variants) {
    for (std::size_t run = 0; run < repeats; ++run) {
      const Trajectory tr = v.bundle ? simulate_surrogate(problem, *v.bundle, config)
                                     : simulate_classical(problem, config);
      report.rows.push_back(
          {v.name, run, tr.wall_ms, tr.total_iterations(), tr.fallback_rate});
    }
  }
  return report;
}

}  // namespace loopsurro
