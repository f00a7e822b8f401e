#include "loopsurro/sampling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "loopsurro/errors.hpp"
#include "loopsurro/rng.hpp"
#include "loopsurro/simulate.hpp"
#include "loopsurro/sobol.hpp"
#include "loopsurro/textio.hpp"

namespace loopsurro {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

InputBounds bounds_of_columns(const Matrix& x, double margin) {
  InputBounds b;
  b.margin_fraction = margin;
  b.dims.resize(x.rows(), Interval{std::numeric_limits<double>::infinity(),
                                   -std::numeric_limits<double>::infinity()});
  for (std::size_t j = 0; j < x.cols(); ++j)
    for (std::size_t i = 0; i < x.rows(); ++i) {
      b.dims[i].min = std::min(b.dims[i].min, x(i, j));
      b.dims[i].max = std::max(b.dims[i].max, x(i, j));
    }
  for (auto& d : b.dims) {
    // The margin is split evenly between the two sides.
    const double w = 0.5 * (d.max - d.min) * margin;
    d.min -= w;
    d.max += w;
  }
  return b;
}

void check_bounds(const InputBounds& bounds) {
  if (bounds.dims.empty()) throw ConfigError("input bounds have no dimensions");
  for (std::size_t i = 0; i < bounds.dims.size(); ++i) {
    const auto& d = bounds.dims[i];
    if (!std::isfinite(d.min) || !std::isfinite(d.max) || d.min > d.max)
      throw ConfigError("invalid bounds in dimension " + std::to_string(i));
  }
}

// splitmix64, used to derive independent per-sample seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

InputBounds profile_bounds(const TrajectoryFn& trajectory, double t0, double t1,
                           std::size_t num_steps, double margin) {
  if (num_steps < 2) throw ConfigError("profile_bounds: num_steps must be at least 2");
  if (!(t1 > t0)) throw ConfigError("profile_bounds: t1 must exceed t0");
  if (margin < 0.0) throw ConfigError("profile_bounds: margin must be non-negative");
  std::vector<std::vector<double>> values;
  for (std::size_t k = 0; k <= num_steps; ++k) {
    const double t = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(num_steps);
    auto x = trajectory(t);
    for (double v : x)
      if (!std::isfinite(v)) throw EvaluationError("non-finite input at t = " + format_double(t));
    values.push_back(std::move(x));
  }
  Matrix m(values.front().size(), values.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (values[j].size() != m.rows()) throw ShapeError("trajectory changed dimension");
    std::copy(values[j].begin(), values[j].end(), m.col(j).begin());
  }
  return bounds_of_columns(m, margin);
}

InputBounds profile_bounds(const Problem& problem, double t0, double t1, std::size_t num_steps,
                           double margin) {
  if (!problem.dynamics.has_state()) {
    const std::size_t n_in = problem.system.n_in;
    return profile_bounds([&](double t) { return problem.dynamics.inputs_at(t, n_in); }, t0, t1,
                          num_steps, margin);
  }
  if (num_steps < 2) throw ConfigError("profile_bounds: num_steps must be at least 2");
  if (margin < 0.0) throw ConfigError("profile_bounds: margin must be non-negative");
  SimConfig cfg = SimConfig::for_problem(problem, num_steps);
  cfg.t0 = t0;
  cfg.t1 = t1;
  const Trajectory traj = simulate_classical(problem, cfg);
  if (!traj.x_values.all_finite()) throw EvaluationError("non-finite input during profiling");
  return bounds_of_columns(traj.x_values, margin);
}

Matrix sobol_sample(const InputBounds& bounds, std::size_t n, std::size_t skip) {
  check_bounds(bounds);
  if (n == 0) throw ConfigError("sobol_sample: N must be at least 1");
  if (bounds.size() > SobolSequence::kMaxDimension)
    throw ConfigError("sobol_sample: dimension " + std::to_string(bounds.size()) +
                      " exceeds " + std::to_string(SobolSequence::kMaxDimension));
  SobolSequence seq(bounds.size());
  seq.skip(skip);
  Matrix out(bounds.size(), n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto u = seq.next();
    for (std::size_t i = 0; i < bounds.size(); ++i) {
      const auto& d = bounds.dims[i];
      out(i, j) = std::min(d.max, d.min + (d.max - d.min) * u[i]);
    }
  }
  return out;
}

Matrix lhs_sample(const InputBounds& bounds, std::size_t n, std::uint64_t seed) {
  check_bounds(bounds);
  if (n == 0) throw ConfigError("lhs_sample: N must be at least 1");
  Rng rng(seed);
  Matrix out(bounds.size(), n);
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    for (std::size_t k = 0; k < n; ++k) perm[k] = k;
    rng.shuffle(perm);
    const auto& d = bounds.dims[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double u = (static_cast<double>(perm[j]) + rng.uniform()) / static_cast<double>(n);
      out(i, j) = std::min(d.max, d.min + (d.max - d.min) * u);
    }
  }
  return out;
}

std::string to_string(SampleMethod m) {
  switch (m) {
    case SampleMethod::Sobol: return "sobol";
    case SampleMethod::Lhs: return "lhs";
    case SampleMethod::Trajectory: return "trajectory";
  }
  return "?";
}

SampleMethod sample_method_from_string(const std::string& s) {
  if (s == "sobol") return SampleMethod::Sobol;
  if (s == "lhs") return SampleMethod::Lhs;
  if (s == "trajectory") return SampleMethod::Trajectory;
  throw ConfigError("unknown sampling method '" + s + "' (expected sobol, lhs or trajectory)");
}

Dataset sobol_dataset(const InputBounds& bounds, std::size_t n, std::size_t skip) {
  Dataset d;
  const auto start = Clock::now();
  d.inputs = sobol_sample(bounds, n, skip);
  d.generation_ms = elapsed_ms(start);
  d.method = SampleMethod::Sobol;
  d.bounds = bounds;
  return d;
}

Dataset lhs_dataset(const InputBounds& bounds, std::size_t n, std::uint64_t seed) {
  Dataset d;
  const auto start = Clock::now();
  d.inputs = lhs_sample(bounds, n, seed);
  d.generation_ms = elapsed_ms(start);
  d.method = SampleMethod::Lhs;
  d.seed = seed;
  d.bounds = bounds;
  return d;
}

Dataset trajectory_dataset(const Problem& problem, double t0, double t1, std::size_t num_steps) {
  SimConfig cfg = SimConfig::for_problem(problem, num_steps);
  cfg.t0 = t0;
  cfg.t1 = t1;
  const auto start = Clock::now();
  Trajectory traj = simulate_classical(problem, cfg);
  Dataset d;
  d.generation_ms = elapsed_ms(start);
  d.inputs = std::move(traj.x_values);
  d.labels = std::move(traj.y_values);
  d.method = SampleMethod::Trajectory;
  d.problem = problem.system.name;
  d.bounds = bounds_of_columns(d.inputs, 0.0);
  return d;
}

std::vector<Interval> estimate_output_range(const Problem& problem, std::size_t steps) {
  const Trajectory traj = simulate_classical(problem, SimConfig::for_problem(problem, steps));
  std::vector<Interval> range(problem.system.n_out,
                              Interval{std::numeric_limits<double>::infinity(),
                                       -std::numeric_limits<double>::infinity()});
  for (std::size_t j = 0; j < traj.y_values.cols(); ++j)
    for (std::size_t i = 0; i < range.size(); ++i) {
      range[i].min = std::min(range[i].min, traj.y_values(i, j));
      range[i].max = std::max(range[i].max, traj.y_values(i, j));
    }
  for (auto& r : range) {
    const double pad = std::max(0.1 * (r.max - r.min), 0.1);
    r.min -= pad;
    r.max += pad;
  }
  return range;
}

Dataset generate_labeled(const ResidualSystem& system, const Dataset& inputs,
                         const LabelOptions& options) {
  options.tol.validate();
  if (inputs.inputs.rows() != system.n_in)
    throw ShapeError("dataset has " + std::to_string(inputs.inputs.rows()) +
                     " input rows, system expects " + std::to_string(system.n_in));
  if (options.seed_range.size() != system.n_out)
    throw ConfigError("label seed range needs one interval per output");
  const std::size_t n = inputs.size();
  const std::size_t n_out = system.n_out;

  const auto start = Clock::now();
  Matrix labels(n_out, n);
  std::vector<unsigned char> ok(n, 0);
#pragma omp parallel
  {
    std::vector<double> y0(n_out);
#pragma omp for schedule(dynamic, 64)
    for (std::size_t j = 0; j < n; ++j) {
      Rng rng(mix_seed(options.seed, j));
      for (std::size_t attempt = 0; attempt <= options.restarts; ++attempt) {
        for (std::size_t i = 0; i < n_out; ++i)
          y0[i] = rng.uniform(options.seed_range[i].min, options.seed_range[i].max);
        const NewtonResult r = newton_solve(system, inputs.inputs.col(j), y0, options.tol);
        if (r.converged) {
          std::copy(r.y.begin(), r.y.end(), labels.col(j).begin());
          ok[j] = 1;
          break;
        }
      }
    }
  }

  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < n; ++j)
    if (ok[j]) kept.push_back(j);
  const std::size_t failed = n - kept.size();
  if (2 * failed > n)
    throw GenerationError("labeling failed for " + std::to_string(failed) + " of " +
                          std::to_string(n) + " samples");

  Dataset out;
  out.inputs = inputs.inputs.select_cols(kept);
  out.labels = labels.select_cols(kept);
  out.generation_ms = elapsed_ms(start);
  out.method = inputs.method;
  out.seed = options.seed;
  out.failed = failed;
  out.bounds = inputs.bounds;
  out.problem = inputs.problem.empty() ? system.name : inputs.problem;
  return out;
}

void save_dataset(const Dataset& data, const std::string& path, const std::string& manifest_hash) {
  CsvTable t;
  if (!manifest_hash.empty()) t.comments.push_back("manifest " + manifest_hash);
  for (std::size_t i = 0; i < data.inputs.rows(); ++i) t.header.push_back("x" + std::to_string(i));
  if (data.labels)
    for (std::size_t i = 0; i < data.labels->rows(); ++i)
      t.header.push_back("y" + std::to_string(i));
  for (std::size_t j = 0; j < data.size(); ++j) {
    std::vector<std::string> row;
    for (double v : data.inputs.col(j)) row.push_back(format_double(v));
    if (data.labels)
      for (double v : data.labels->col(j)) row.push_back(format_double(v));
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);

  KeyValues meta;
  if (!manifest_hash.empty()) meta.set("manifest", manifest_hash);
  meta.set("problem", data.problem);
  meta.set("method", to_string(data.method));
  meta.set_int("seed", static_cast<long long>(data.seed));
  meta.set_int("samples", static_cast<long long>(data.size()));
  meta.set_int("failed", static_cast<long long>(data.failed));
  meta.set("labeled", data.labels ? "true" : "false");
  meta.set("margin_fraction", data.bounds.margin_fraction);
  for (std::size_t i = 0; i < data.bounds.size(); ++i) {
    meta.set("bounds.x" + std::to_string(i) + ".min", data.bounds.dims[i].min);
    meta.set("bounds.x" + std::to_string(i) + ".max", data.bounds.dims[i].max);
  }
  meta.set("generation_ms", data.generation_ms);
  meta.save(path + ".meta");
}

Dataset load_dataset(const std::string& path) {
  const CsvTable t = read_csv(path);
  std::size_t n_in = 0, n_out = 0;
  for (const auto& h : t.header) {
    if (!h.empty() && h[0] == 'x') ++n_in;
    else if (!h.empty() && h[0] == 'y') ++n_out;
    else throw ConsistencyError(path + ": unexpected column '" + h + "'");
  }
  if (n_in == 0) throw ConsistencyError(path + ": no input columns");
  if (t.rows.empty()) throw ConsistencyError(path + ": no samples");
  Dataset d;
  d.inputs = Matrix(n_in, t.rows.size());
  if (n_out > 0) d.labels = Matrix(n_out, t.rows.size());
  for (std::size_t j = 0; j < t.rows.size(); ++j) {
    for (std::size_t i = 0; i < n_in; ++i)
      d.inputs(i, j) = parse_double(t.rows[j][t.column("x" + std::to_string(i))]);
    for (std::size_t i = 0; i < n_out; ++i)
      (*d.labels)(i, j) = parse_double(t.rows[j][t.column("y" + std::to_string(i))]);
  }
  const KeyValues meta = KeyValues::load(path + ".meta");
  d.problem = meta.get("problem");
  d.method = sample_method_from_string(meta.get("method"));
  d.seed = static_cast<std::uint64_t>(meta.get_int("seed"));
  d.failed = static_cast<std::size_t>(meta.get_int("failed"));
  d.generation_ms = meta.get_double("generation_ms");
  d.bounds.margin_fraction = meta.get_double("margin_fraction");
  for (std::size_t i = 0; i < n_in; ++i) {
    const std::string key = "bounds.x" + std::to_string(i);
    if (!meta.has(key + ".min")) break;
    d.bounds.dims.push_back({meta.get_double(key + ".min"), meta.get_double(key + ".max")});
  }
  return d;
}

GuidanceTargets labels_to_clusters_targets(const Dataset& data, std::size_t k,
                                           std::uint64_t seed) {
  if (!data.labels) throw ConsistencyError("clustering needs a labeled dataset");
  if (k == 0) throw ConfigError("k must be at least 1");
  if (k > data.size())
    throw ConfigError("k = " + std::to_string(k) + " exceeds the dataset size " +
                      std::to_string(data.size()));
  const Matrix& y = *data.labels;
  GuidanceTargets g;
  g.clusters = kmeans(y, k, seed);
  g.members.resize(k);
  for (std::size_t j = 0; j < y.cols(); ++j) g.members[g.clusters.assignments[j]].push_back(j);
  g.targets = Matrix(y.rows(), k);
  g.representatives.assign(k, 0);
  for (std::size_t c = 0; c < k; ++c) {
    double best = std::numeric_limits<double>::infinity();
    const auto centroid = g.clusters.centroids.col(c);
    for (std::size_t j : g.members[c]) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < y.rows(); ++i) {
        const double d = y(i, j) - centroid[i];
        d2 += d * d;
      }
      if (d2 < best) {
        best = d2;
        g.representatives[c] = j;
      }
    }
    std::copy(y.col(g.representatives[c]).begin(), y.col(g.representatives[c]).end(),
              g.targets.col(c).begin());
  }
  return g;
}

}  // namespace loopsurro
