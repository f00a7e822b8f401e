#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "loopsurro/matrix.hpp"
#include "loopsurro/multimodel.hpp"
#include "loopsurro/newton.hpp"
#include "loopsurro/problems.hpp"

namespace loopsurro {

struct SimConfig {
  double t0 = 0.0;
  double t1 = 1.0;
  std::size_t num_steps = 200;
  ToleranceSpec newton_tol;
  // Surrogate acceptance: ||f(x, yhat)||_inf <= atol + rtol ||yhat||_inf.
  ToleranceSpec fallback_tol{1e-6, 1e-4, 100};
  bool warm_start = true;
  // Newton seed for the first step (and every step without warm start).
  // Defaults to the problem's initial guess.
  std::vector<double> initial_guess;

  void validate() const;
  static SimConfig for_problem(const Problem& problem, std::size_t num_steps);
};

enum class StepSource { Surrogate, Fallback, Newton };
std::string to_string(StepSource s);

struct Trajectory {
  std::vector<double> times;  // num_steps + 1
  Matrix x_values;            // n_in x steps
  Matrix y_values;            // accepted outputs
  Matrix predictions;         // raw surrogate outputs (empty for classical runs)
  std::vector<StepSource> sources;
  std::vector<std::size_t> iterations;
  std::vector<double> residual_norms;
  std::vector<std::size_t> selected;  // network index per step (surrogate runs)
  double wall_ms = 0.0;
  double fallback_rate = 0.0;

  std::size_t steps() const { return times.size(); }
  std::size_t total_iterations() const;
  std::size_t fallback_count() const;
  void save_csv(const std::string& path, const std::string& manifest_hash = "") const;
};

// Newton at every grid point, explicit Euler for problems with state.
// SimulationError (with the step index) if Newton fails.
Trajectory simulate_classical(const Problem& problem, const SimConfig& config);

// Bundle prediction at every step, accepted when the residual passes the
// fallback tolerance and otherwise refined by Newton from the prediction.
// A ByCentroid bundle starts from a Newton solve at t0.
Trajectory simulate_surrogate(const Problem& problem, const SurrogateBundle& bundle,
                              const SimConfig& config);

struct TrajectoryComparison {
  double max_abs = 0.0;
  double max_rel = 0.0;
  std::optional<std::size_t> first_violation_step;  // |a - b| > atol + rtol |a|
};

// Elementwise over y_values. ShapeError on mismatched grids.
TrajectoryComparison compare_trajectories(const Trajectory& a, const Trajectory& b,
                                          const ToleranceSpec& tol);

struct BenchmarkVariant {
  std::string name;
  std::optional<SurrogateBundle> bundle;  // empty: classical
};

struct BenchmarkRow {
  std::string variant;
  std::size_t run = 0;
  double wall_ms = 0.0;
  std::size_t total_newton_iters = 0;
  double fallback_rate = 0.0;
};

struct BenchmarkSummary {
  std::string variant;
  double mean_ms = 0.0;
  double min_ms = 0.0;
  double mean_newton_iters = 0.0;
  double mean_fallback_rate = 0.0;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
  std::vector<BenchmarkSummary> summary() const;
  void save_csv(const std::string& path, const std::string& manifest_hash = "") const;
};

// Runs every variant `repeats` times, sequentially so timings do not overlap.
BenchmarkReport benchmark(const Problem& problem, const std::vector<BenchmarkVariant>& variants,
                          const SimConfig& config, std::size_t repeats);

}  // namespace loopsurro
