#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "loopsurro/clustering.hpp"
#include "loopsurro/matrix.hpp"
#include "loopsurro/newton.hpp"
#include "loopsurro/problems.hpp"

namespace loopsurro {

using TrajectoryFn = std::function<std::vector<double>(double t)>;

// Per-dimension min/max of x(t) on a uniform grid of num_steps + 1 points,
// widened by margin * width in total, half on each side.
InputBounds profile_bounds(const TrajectoryFn& trajectory, double t0, double t1,
                           std::size_t num_steps, double margin = 0.0);
// Uses x(t) directly for stateless problems and a classical simulation for
// problems with state.
InputBounds profile_bounds(const Problem& problem, double t0, double t1, std::size_t num_steps,
                           double margin = 0.0);

// Unit-cube Sobol points mapped into the box. skip = 1 drops the origin.
Matrix sobol_sample(const InputBounds& bounds, std::size_t n, std::size_t skip = 1);
// One point per stratum [k/n, (k+1)/n) in each dimension.
Matrix lhs_sample(const InputBounds& bounds, std::size_t n, std::uint64_t seed);

enum class SampleMethod { Sobol, Lhs, Trajectory };
std::string to_string(SampleMethod m);
SampleMethod sample_method_from_string(const std::string& s);

struct Dataset {
  Matrix inputs;                 // n_in x N
  std::optional<Matrix> labels;  // n_out x N
  SampleMethod method = SampleMethod::Sobol;
  double generation_ms = 0.0;    // wall time of the step that produced the data
  std::uint64_t seed = 0;
  std::size_t failed = 0;        // samples dropped during labeling
  InputBounds bounds;
  std::string problem;           // name of the problem the data belongs to

  std::size_t size() const { return inputs.cols(); }
  bool labeled() const { return labels.has_value(); }
};

// Input-only datasets; generation_ms times the sampling itself.
Dataset sobol_dataset(const InputBounds& bounds, std::size_t n, std::size_t skip = 1);
Dataset lhs_dataset(const InputBounds& bounds, std::size_t n, std::uint64_t seed);
// Inputs and labels from a classical simulation on num_steps + 1 grid points.
Dataset trajectory_dataset(const Problem& problem, double t0, double t1, std::size_t num_steps);

struct LabelOptions {
  ToleranceSpec tol;
  std::size_t restarts = 3;
  std::uint64_t seed = 0;
  // Newton seeds are drawn uniformly from this box (one interval per output).
  std::vector<Interval> seed_range;
};

// Output box seen along a short classical run, widened by 10% of its width
// (at least 0.1) per side.
std::vector<Interval> estimate_output_range(const Problem& problem, std::size_t steps = 50);

// Labels every input with Newton from a seeded random start, re-drawing up to
// `restarts` times on failure. Failed samples are dropped and counted.
// GenerationError when more than half of the samples fail.
Dataset generate_labeled(const ResidualSystem& system, const Dataset& inputs,
                         const LabelOptions& options);

// CSV with columns x0.., y0.. and a "<path>.meta" key-value sidecar.
void save_dataset(const Dataset& data, const std::string& path,
                  const std::string& manifest_hash = "");
Dataset load_dataset(const std::string& path);

struct GuidanceTargets {
  ClusterModel clusters;
  Matrix targets;                       // n_out x k, actual labels
  std::vector<std::size_t> representatives;  // dataset column of each target
  std::vector<std::vector<std::size_t>> members;  // dataset columns per cluster
};

// Clusters the label columns; each cluster's target is the label closest to
// its centroid.
GuidanceTargets labels_to_clusters_targets(const Dataset& data, std::size_t k,
                                           std::uint64_t seed);

}  // namespace loopsurro
