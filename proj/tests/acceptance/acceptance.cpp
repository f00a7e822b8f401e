// Acceptance suite: one PASS/FAIL line per criterion.
//
//   loopsurro_acceptance [--only c3] [--out DIR]

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "loopsurro/errors.hpp"
#include "loopsurro/losses.hpp"
#include "loopsurro/mlp.hpp"
#include "loopsurro/multimodel.hpp"
#include "loopsurro/newton.hpp"
#include "loopsurro/problems.hpp"
#include "loopsurro/rng.hpp"
#include "loopsurro/sampling.hpp"
#include "loopsurro/simulate.hpp"
#include "loopsurro/textio.hpp"
#include "loopsurro/training.hpp"

namespace fs = std::filesystem;
using namespace loopsurro;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records one check; the criterion passes only if every check does.
  void check(bool ok, const std::string& what) {
    if (!detail.str().empty()) detail << "; ";
    detail << what << (ok ? "" : " [failed]");
    pass = pass && ok;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

bool rel_close(double a, double b, double rel, double floor) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), floor});
}

Matrix trajectory_inputs(const Problem& p, double t0, double t1, std::size_t steps) {
  Matrix x(p.system.n_in, steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(steps);
    const auto xk = p.dynamics.inputs_at(t, p.system.n_in);
    std::copy(xk.begin(), xk.end(), x.col(k).begin());
  }
  return x;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

// ---------------------------------------------------------------------------
// c1: analytic gradients against central differences.

Outcome gradient_fidelity() {
  Outcome out;
  const auto start = Clock::now();
  const std::vector<Problem> problems{simpleloop(),    complexsqrt(),         piecewiseloop(),
                                      cubicloop_ode(), syntheticgrid(32, 1)};
  const double h_out = 1e-3;
  const double h = 1e-6;  // parameters: small enough not to cross ReLU kinks
  std::size_t checked = 0, bad = 0;
  double worst = 0.0;
  for (const Problem& p : problems) {
    Rng rng(101);
    const std::size_t n = 50, n_in = p.system.n_in, n_out = p.system.n_out;
    Matrix x(n_in, n), yhat(n_out, n), y(n_out, n);
    for (std::size_t j = 0; j < n; ++j) {
      if (p.system.input_bounds) {
        for (std::size_t i = 0; i < n_in; ++i)
          x(i, j) = rng.uniform(p.system.input_bounds->dims[i].min, p.system.input_bounds->dims[i].max);
      } else {
        const auto xt = p.dynamics.inputs_at(0.0, n_in);
        for (std::size_t i = 0; i < n_in; ++i) x(i, j) = xt[i] * rng.uniform(0.2, 1.5);
      }
    }
    for (double& v : yhat.values()) v = rng.uniform(-2.0, 2.0);
    for (double& v : y.values()) v = rng.uniform(-2.0, 2.0);
    // Residual (lambda 1), supervised (lambda 0) and a blend.
    for (double lambda : {1.0, 0.0, 0.3}) {
      const Matrix g = semi_supervised_loss_gradient(p.system, x, yhat, &y, lambda);
      for (std::size_t j = 0; j < n; ++j) {
        const Matrix xj = x.col_range(j, 1), yj = y.col_range(j, 1);
        for (std::size_t i = 0; i < n_out; ++i) {
          // Five-point stencil: truncation error O(h^4), well below the tolerance.
          auto loss_at = [&](double offset) {
            Matrix yj_hat = yhat.col_range(j, 1);
            yj_hat(i, 0) += offset;
            return semi_supervised_loss(p.system, xj, yj_hat, &yj, lambda);
          };
          const double fd = (8.0 * (loss_at(h_out) - loss_at(-h_out)) -
                             (loss_at(2.0 * h_out) - loss_at(-2.0 * h_out))) /
                            (12.0 * h_out);
          const double analytic = g(i, j) * static_cast<double>(n);
          ++checked;
          const double scale = std::max({std::abs(fd), std::abs(analytic), 1e-3});
          worst = std::max(worst, std::abs(fd - analytic) / scale);
          if (!rel_close(analytic, fd, 1e-6, 1e-3)) ++bad;
        }
      }
    }
  }
  out.check(bad == 0, "output gradients: " + std::to_string(checked) + " entries, worst rel " +
                          fmt(worst) + " (tol 1e-6)");

  // Parameter gradients of the full residual loss for a tiny network.
  std::size_t pchecked = 0, pbad = 0;
  double pworst = 0.0;
  for (const Problem& p : problems) {
    const std::vector<std::size_t> sizes{p.system.feature_dim(), 4, p.system.n_out};
    MlpNetwork net = init_network(sizes, Activation::ReLU, 5);
    for (auto& layer : net.layers)
      for (std::size_t k = 0; k < layer.bias.size(); ++k) layer.bias[k] = 0.05 * (k + 1.0);
    Rng rng(7);
    const std::size_t n = 20;
    Matrix x(p.system.n_in, n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < p.system.n_in; ++i)
        x(i, j) = p.system.input_bounds
                      ? rng.uniform(p.system.input_bounds->dims[i].min, p.system.input_bounds->dims[i].max)
                      : rng.uniform(1.0, 10.0);
    const Matrix feats = p.system.features(x);
    auto loss_of = [&](const MlpNetwork& m) { return residual_loss(p.system, x, forward(m, feats)); };
    ForwardCache cache;
    const Matrix yhat = forward(net, feats, &cache);
    const ParameterSet g =
        backward_with_output_gradient(net, cache, residual_loss_gradient(p.system, x, yhat));
    auto compare = [&](double& param, double analytic) {
      const double saved = param;
      param = saved + h;
      const double lp = loss_of(net);
      param = saved - h;
      const double lm = loss_of(net);
      param = saved;
      const double fd = (lp - lm) / (2.0 * h);
      ++pchecked;
      const double scale = std::max({std::abs(fd), std::abs(analytic), 1e-6});
      pworst = std::max(pworst, std::abs(fd - analytic) / scale);
      if (!rel_close(analytic, fd, 1e-5, 1e-6)) ++pbad;
    };
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      for (std::size_t k = 0; k < net.layers[l].weight.size(); ++k)
        compare(net.layers[l].weight.data()[k], g.weights[l].data()[k]);
      for (std::size_t k = 0; k < net.layers[l].bias.size(); ++k)
        compare(net.layers[l].bias[k], g.biases[l][k]);
    }
  }
  out.check(pbad == 0, "parameter gradients: " + std::to_string(pchecked) + " entries, worst rel " +
                           fmt(pworst) + " (tol 1e-5)");
  const double secs = seconds_since(start);
  out.check(secs < 30.0, "runtime " + fmt(secs) + " s (< 30 s)");
  return out;
}

// ---------------------------------------------------------------------------
// c2: supervised training on ambiguous data averages the roots; residual
// training picks one.

Outcome ambiguity(const fs::path& dir) {
  Outcome out;
  const auto start = Clock::now();
  const Problem p = simpleloop();
  const InputBounds bounds = profile_bounds(p, 0.0, 2.0, 1000);
  const std::size_t distinct = 2000;
  const Matrix base = sobol_sample(bounds, distinct);
  // Every input appears twice, once per root.
  Dataset data;
  data.inputs = Matrix(3, 2 * distinct);
  data.labels = Matrix(1, 2 * distinct);
  data.bounds = bounds;
  data.problem = p.system.name;
  double bound = 0.0;
  std::vector<double> lo(distinct), hi(distinct);
  for (std::size_t j = 0; j < distinct; ++j) {
    std::tie(lo[j], hi[j]) = simpleloop_roots(base(1, j), base(2, j));
    for (std::size_t copy = 0; copy < 2; ++copy) {
      std::copy(base.col(j).begin(), base.col(j).end(), data.inputs.col(2 * j + copy).begin());
      (*data.labels)(0, 2 * j + copy) = copy == 0 ? lo[j] : hi[j];
    }
    // Half the empirical variance of the two labels at this input.
    const double half_gap = 0.5 * (hi[j] - lo[j]);
    bound += 0.5 * half_gap * half_gap / static_cast<double>(distinct);
  }

  TrainConfig cfg;
  cfg.epochs = 300;
  cfg.seed = 2;
  cfg.mode = LossMode::Supervised;
  MlpNetwork sup = make_surrogate_network(p.system, cfg.hidden, cfg.seed);
  train(p.system, data, nullptr, sup, cfg);
  const Matrix sup_pred = predict(p.system, sup, data.inputs);
  const double sup_loss = mse_loss(sup_pred, *data.labels);

  cfg.mode = LossMode::Residual;
  MlpNetwork res = make_surrogate_network(p.system, cfg.hidden, cfg.seed);
  const TrainReport res_report = train(p.system, data, nullptr, res, cfg);
  const Matrix res_pred = predict(p.system, res, base);
  const double res_loss = residual_loss(p.system, base, res_pred);

  std::size_t between = 0, on_branch = 0;
  CsvTable scatter;
  scatter.header = {"r", "s", "y_lower", "y_upper", "supervised", "residual"};
  for (std::size_t j = 0; j < distinct; ++j) {
    const double gap = hi[j] - lo[j];
    const double ys = sup_pred(0, 2 * j), yr = res_pred(0, j);
    if (ys > lo[j] + 0.1 * gap && ys < hi[j] - 0.1 * gap) ++between;
    if (std::min(std::abs(yr - lo[j]), std::abs(yr - hi[j])) < 0.05 * gap) ++on_branch;
    scatter.rows.push_back({format_double(base(1, j)), format_double(base(2, j)), format_double(lo[j]),
                            format_double(hi[j]), format_double(ys), format_double(yr)});
  }
  write_csv((dir / "c2_scatter.csv").string(), scatter);

  out.check(sup_loss >= 0.9 * bound, "supervised loss " + fmt(sup_loss) + " >= 0.9 x bound " + fmt(bound));
  out.check(res_loss < 1e-3 && res_report.final_train_loss() < 1e-3,
            "residual loss " + fmt(res_loss) + " (train " + fmt(res_report.final_train_loss()) + ") < 1e-3");
  const double frac_between = static_cast<double>(between) / distinct;
  const double frac_branch = static_cast<double>(on_branch) / distinct;
  out.check(frac_between >= 0.9, "supervised between branches at " + fmt(100 * frac_between) + "% of inputs");
  out.check(frac_branch >= 0.95, "residual on a branch at " + fmt(100 * frac_branch) + "% of inputs");
  const double secs = seconds_since(start);
  out.check(secs < 300.0, "runtime " + fmt(secs) + " s (< 300 s)");
  return out;
}

// ---------------------------------------------------------------------------
// c3: default residual training on simpleloop.

Outcome simpleloop_convergence(const fs::path& dir) {
  Outcome out;
  const auto start = Clock::now();
  const Problem p = simpleloop();
  const InputBounds bounds = profile_bounds(p, 0.0, 2.0, 1000);
  const Dataset data = sobol_dataset(bounds, 10000);
  const Dataset validation = trajectory_dataset(p, 0.0, 2.0, 200);
  TrainConfig cfg;
  cfg.seed = 1;
  MlpNetwork net = make_surrogate_network(p.system, cfg.hidden, cfg.seed);
  const TrainReport report = train(p.system, data, &validation, net, cfg);
  report.save_csv((dir / "c3_train_report.csv").string());
  out.check(report.final_train_loss() <= 1e-3,
            "final train loss " + fmt(report.final_train_loss()) + " <= 1e-3 after " +
                std::to_string(report.epochs_run) + " epochs");

  // Raw surrogate against whichever closed-form branch it follows.
  const Matrix x = trajectory_inputs(p, 0.0, 2.0, 200);
  const Matrix pred = predict(p.system, net, x);
  double err_lo = 0.0, err_hi = 0.0;
  for (std::size_t k = 0; k < x.cols(); ++k) {
    const auto [lo, hi] = simpleloop_roots(x(1, k), x(2, k));
    err_lo = std::max(err_lo, std::abs(pred(0, k) - lo));
    err_hi = std::max(err_hi, std::abs(pred(0, k) - hi));
  }
  const bool upper = err_hi < err_lo;
  const double raw_err = std::min(err_lo, err_hi);
  out.check(raw_err < 1e-2, std::string(upper ? "upper" : "lower") + " branch, raw max error " +
                                fmt(raw_err) + " < 1e-2");

  // With error control the accepted outputs solve the loop tightly.
  SimConfig sim = SimConfig::for_problem(p, 200);
  sim.fallback_tol = ToleranceSpec{1e-7, 0.0, 100};
  const Trajectory traj = simulate_surrogate(p, single_bundle(p.system, net), sim);
  traj.save_csv((dir / "c3_trajectory.csv").string());
  double ctl_err = 0.0;
  for (std::size_t k = 0; k < traj.steps(); ++k) {
    const auto [lo, hi] = simpleloop_roots(traj.x_values(1, k), traj.x_values(2, k));
    ctl_err = std::max(ctl_err, std::abs(traj.y_values(0, k) - (upper ? hi : lo)));
  }
  out.check(ctl_err < 1e-6, "error-controlled max error " + fmt(ctl_err) + " < 1e-6 (fallback rate " +
                                fmt(traj.fallback_rate) + ")");
  const double secs = seconds_since(start);
  out.check(secs < 600.0, "runtime " + fmt(secs) + " s (< 600 s)");
  return out;
}

// ---------------------------------------------------------------------------
// c4: Newton iterations seeded by the trained surrogate on syntheticgrid(32).

Outcome iteration_reduction(const fs::path& dir) {
  Outcome out;
  const Problem p = syntheticgrid(32, 1);
  const Dataset data = sobol_dataset(*p.system.input_bounds, 10000);
  const Dataset validation = trajectory_dataset(p, p.dynamics.t0, p.dynamics.t1, 200);
  TrainConfig cfg;
  cfg.seed = 1;
  cfg.probe_count = validation.size();
  MlpNetwork net = make_surrogate_network(p.system, cfg.hidden, cfg.seed);

  const Matrix& probes = validation.inputs;
  Matrix cold_seed(p.system.n_out, probes.cols());
  for (std::size_t j = 0; j < probes.cols(); ++j)
    std::copy(p.dynamics.initial_guess.begin(), p.dynamics.initial_guess.end(), cold_seed.col(j).begin());
  const double cold = newton_iterations_from(p.system, probes, cold_seed, cfg.tol).mean;
  const double untrained = iteration_metric(p.system, net, probes, cfg.tol);

  const TrainReport report = train(p.system, data, &validation, net, cfg);
  report.save_csv((dir / "c4_train_report.csv").string());
  const double trained = iteration_metric(p.system, net, probes, cfg.tol);
  std::map<std::size_t, double> metric;
  for (const auto& rec : report.history)
    if (rec.newton_metric) metric[rec.epoch + 1] = *rec.newton_metric;

  out.check(trained <= 5.0, "trained mean iterations " + fmt(trained) + " <= 5");
  out.check(trained <= 0.25 * cold, "cold start " + fmt(cold) + " (untrained net " + fmt(untrained) +
                                        "), ratio " + fmt(trained / cold) + " <= 0.25");
  const bool have = metric.count(100) && metric.count(1000);
  const double m100 = have ? metric[100] : NAN, m1000 = have ? metric[1000] : NAN;
  out.check(have && std::abs(m100 - m1000) <= 2.0,
            "metric at epoch 100 " + fmt(m100) + " vs 1000 " + fmt(m1000) + " (within 2)");
  return out;
}

// ---------------------------------------------------------------------------
// c5: labeling costs far more than sampling.

Outcome generation_asymmetry() {
  Outcome out;
  const Problem p = simpleloop();
  const InputBounds bounds = profile_bounds(p, 0.0, 2.0, 1000);
  const Dataset inputs = sobol_dataset(bounds, 10000);
  LabelOptions opt;
  opt.seed = 1;
  opt.seed_range = estimate_output_range(p);
  const Dataset labeled = generate_labeled(p.system, inputs, opt);
  const double sample_ms = inputs.generation_ms;
  const double labeled_ms = inputs.generation_ms + labeled.generation_ms;
  out.check(labeled_ms >= 10.0 * sample_ms, "sampling " + fmt(sample_ms) + " ms, labeled " + fmt(labeled_ms) +
                                                " ms, ratio " + fmt(labeled_ms / sample_ms) + " >= 10");
  out.check(labeled.failed == 0, std::to_string(labeled.failed) + " failed labels");
  return out;
}

// ---------------------------------------------------------------------------
// c6: an untrained bundle cannot spoil accuracy.

Outcome error_control() {
  Outcome out;
  const Problem p = cubicloop_ode();
  const SimConfig sim = SimConfig::for_problem(p, 200);
  const Trajectory ref = simulate_classical(p, sim);
  const SurrogateBundle bundle =
      single_bundle(p.system, make_surrogate_network(p.system, {160, 160}, 3));
  const Trajectory traj = simulate_surrogate(p, bundle, sim);
  const double err = compare_trajectories(ref, traj, sim.fallback_tol).max_abs;
  out.check(traj.fallback_rate == 1.0, "fallback rate " + fmt(traj.fallback_rate) + " == 1");
  out.check(err <= 1e-6, "max deviation from classical " + fmt(err) + " <= 1e-6");
  return out;
}

// ---------------------------------------------------------------------------
// c7: per-cluster bundle on complexsqrt switches once along an output arc.

Outcome connected_switching(const fs::path& dir) {
  Outcome out;
  const Problem base = complexsqrt();
  const Dataset inputs = sobol_dataset(*base.system.input_bounds, 8000);
  LabelOptions opt;
  opt.seed = 3;
  opt.seed_range = {{-1.7, 1.7}, {-1.7, 1.7}};
  const Dataset labeled = generate_labeled(base.system, inputs, opt);

  TrainConfig cfg;
  cfg.epochs = 400;
  cfg.switch_epoch = 100;
  cfg.seed = 7;
  cfg.hidden = {64, 64};
  const MultiTrainResult trained = train_per_cluster(base.system, labeled, 4, cfg);
  const SurrogateBundle& bundle = trained.bundle;

  // Output arc of radius 1 between two adjacent centroids, chosen so that it
  // crosses the square-root cut (outputs at +-90 degrees, inputs on the
  // negative real axis).
  std::vector<std::pair<double, std::size_t>> angles;
  for (std::size_t c = 0; c < bundle.centroids.cols(); ++c)
    angles.emplace_back(std::atan2(bundle.centroids(1, c), bundle.centroids(0, c)), c);
  std::sort(angles.begin(), angles.end());
  double beta0 = 0.0, beta1 = 0.0;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const double a = angles[i].first;
    double b = angles[(i + 1) % angles.size()].first;
    if (b <= a) b += 2.0 * std::numbers::pi;
    const double cut = std::numbers::pi / 2;
    if ((a <= cut && cut <= b) || (a <= cut + 2 * std::numbers::pi && cut + 2 * std::numbers::pi <= b)) {
      beta0 = a;
      beta1 = b;
    }
  }
  Problem arc = base;
  arc.dynamics.t0 = 0.0;
  arc.dynamics.t1 = 1.0;
  arc.dynamics.inputs = [beta0, beta1](double t, std::span<const double>, std::span<double> x) {
    const double beta = beta0 + (beta1 - beta0) * t;
    x[0] = std::cos(2.0 * beta);
    x[1] = std::sin(2.0 * beta);
  };
  arc.dynamics.initial_guess = {std::cos(beta0), std::sin(beta0)};

  const SimConfig sim = SimConfig::for_problem(arc, 200);
  const Trajectory ref = simulate_classical(arc, sim);
  const Trajectory traj = simulate_surrogate(arc, bundle, sim);
  traj.save_csv((dir / "c7_trajectory.csv").string());
  ref.save_csv((dir / "c7_reference.csv").string());

  const double pred_err = max_abs_diff(traj.predictions, ref.y_values);
  const double traj_err = max_abs_diff(traj.y_values, ref.y_values);
  std::size_t transitions = 0;
  for (std::size_t k = 1; k < traj.steps(); ++k)
    if (traj.selected[k] != traj.selected[k - 1]) ++transitions;
  out.check(pred_err < 0.05 && traj_err < 0.05,
            "arc " + fmt(beta0 * 180 / std::numbers::pi) + ".." + fmt(beta1 * 180 / std::numbers::pi) +
                " deg, bundle max error " + fmt(pred_err) + " (accepted " + fmt(traj_err) + ") < 0.05");
  out.check(transitions == 1, std::to_string(transitions) + " selector transition(s)");
  std::string singles;
  bool all_insufficient = true;
  for (std::size_t c = 0; c < bundle.networks.size(); ++c) {
    const double e = max_abs_diff(predict(base.system, bundle.networks[c], ref.x_values), ref.y_values);
    singles += (c ? "," : "") + fmt(e);
    all_insufficient = all_insufficient && e > 0.5;
  }
  out.check(all_insufficient, "single-network max errors " + singles + " (each > 0.5)");
  return out;
}

// ---------------------------------------------------------------------------
// c8: two networks for the two branches of the piecewise loop.

Outcome branch_pair(const fs::path& dir) {
  Outcome out;
  const Problem p = piecewiseloop();
  const std::size_t n_in = p.system.n_in;
  // Bounds of each branch from the profiling run, split by branch_of.
  const Trajectory profile = simulate_classical(p, SimConfig::for_problem(p, 1000));
  std::vector<Dataset> datasets(2);
  std::vector<Matrix> guidance(2);
  for (int b = 0; b < 2; ++b) {
    InputBounds bounds;
    bounds.dims.assign(n_in, Interval{INFINITY, -INFINITY});
    for (std::size_t k = 0; k < profile.steps(); ++k) {
      if (p.system.branch_of(profile.x_values.col(k)) != b) continue;
      for (std::size_t i = 0; i < n_in; ++i) {
        bounds.dims[i].min = std::min(bounds.dims[i].min, profile.x_values(i, k));
        bounds.dims[i].max = std::max(bounds.dims[i].max, profile.x_values(i, k));
      }
    }
    datasets[b] = sobol_dataset(bounds, 10000);
    // Phase-1 targets: the upper root of this branch, which the classical run follows.
    const double scale = b == 1 ? 0.5 : 1.0;
    guidance[b] = Matrix(1, datasets[b].size());
    for (std::size_t j = 0; j < datasets[b].size(); ++j)
      guidance[b](0, j) =
          simpleloop_roots(scale * datasets[b].inputs(1, j), datasets[b].inputs(2, j)).second;
  }
  TrainConfig cfg;
  cfg.seed = 11;
  cfg.switch_epoch = 100;
  const MultiTrainResult trained = train_per_branch(p.system, datasets, guidance, cfg);

  const SimConfig sim = SimConfig::for_problem(p, 200);
  const Trajectory ref = simulate_classical(p, sim);
  const Trajectory traj = simulate_surrogate(p, trained.bundle, sim);
  traj.save_csv((dir / "c8_trajectory.csv").string());
  const double pred_err = max_abs_diff(traj.predictions, ref.y_values);
  out.check(pred_err < 1e-2, "composed bundle max error " + fmt(pred_err) + " < 1e-2");

  // Each member alone on the other regime.
  double off_in_window = 0.0, on_outside = 0.0;
  const Matrix off_pred = predict(p.system, trained.bundle.networks[0], ref.x_values);
  const Matrix on_pred = predict(p.system, trained.bundle.networks[1], ref.x_values);
  for (std::size_t k = 0; k < ref.steps(); ++k) {
    const bool fault = p.system.branch_of(ref.x_values.col(k)) == 1;
    const double e_off = std::abs(off_pred(0, k) - ref.y_values(0, k));
    const double e_on = std::abs(on_pred(0, k) - ref.y_values(0, k));
    if (fault) off_in_window = std::max(off_in_window, e_off);
    else on_outside = std::max(on_outside, e_on);
  }
  out.check(off_in_window > 0.1, "fault-off network inside the window " + fmt(off_in_window) + " > 0.1");
  out.check(on_outside > 0.1, "fault-on network outside the window " + fmt(on_outside) + " > 0.1");
  return out;
}

// ---------------------------------------------------------------------------
// c9: the CLI pipeline reruns byte for byte.

int run_cli(const fs::path& dir, const std::string& args) {
  const std::string cmd = "cd '" + dir.string() + "' && '" + LOOPSURRO_CLI_PATH + "' " + args +
                          " > cli_stdout.txt 2> cli_stderr.txt";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Benchmark CSV without the wall-clock column.
std::string benchmark_without_timing(const fs::path& path) {
  const CsvTable t = read_csv(path.string());
  const std::size_t skip = t.column("wall_ms");
  std::string s;
  for (const auto& c : t.comments) s += c + "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      if (i != skip) s += row[i] + ",";
    s += "\n";
  }
  return s;
}

// Key-value text without wall-clock entries (keys ending in _ms or timestamp).
std::string key_values_without_timing(const fs::path& path) {
  std::istringstream in(read_text_file(path.string()));
  std::string line, s;
  while (std::getline(in, line)) {
    const std::string key = line.substr(0, line.find(" ="));
    if (key.ends_with("_ms") || key.ends_with("timestamp")) continue;
    s += line + "\n";
  }
  return s;
}

Outcome determinism(const fs::path& dir) {
  Outcome out;
  const std::vector<std::string> steps{
      "--seed 5 profile complexsqrt --t0 0 --t1 2 --steps 400",
      "--seed 5 sample complexsqrt -n 2000 --label --seed-range -1.7 1.7",
      "--seed 5 train complexsqrt --clusters 2 --epochs 20 --switch-epoch 5 --hidden 32 32 "
      "--metric-every 5 --out-dir .",
      "--seed 5 simulate complexsqrt --model model",
      "--seed 5 benchmark complexsqrt --model model --repeats 3",
      "--seed 5 report",
  };
  const fs::path a = dir / "c9_run_a", b = dir / "c9_run_b";
  bool ran = true;
  for (const fs::path& d : {a, b}) {
    fs::remove_all(d);
    fs::create_directories(d);
    for (const auto& s : steps) {
      const int code = run_cli(d, s);
      if (code != 0) {
        out.check(false, "'" + s + "' exited " + std::to_string(code));
        ran = false;
        break;
      }
    }
  }
  if (!ran) return out;

  std::size_t compared = 0;
  std::vector<std::string> differing;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a);
    const std::string ext = rel.extension().string();
    if (ext == ".manifest" || rel.filename().string().starts_with("cli_")) continue;
    if (!fs::exists(b / rel)) {
      differing.push_back(rel.string() + " (missing)");
      continue;
    }
    ++compared;
    bool same;
    if (rel.filename() == "benchmark.csv")
      same = benchmark_without_timing(a / rel) == benchmark_without_timing(b / rel);
    else if (ext == ".meta" || ext == ".kv")
      same = key_values_without_timing(a / rel) == key_values_without_timing(b / rel);
    else
      same = read_text_file((a / rel).string()) == read_text_file((b / rel).string());
    // Report files derived from timings are not expected to match.
    const bool timing_derived = rel.parent_path() == "report" &&
                                (rel.filename() == "benchmark.dat" || rel.filename() == "summary.txt");
    if (!same && !timing_derived) differing.push_back(rel.string());
  }
  std::string list;
  for (const auto& d : differing) list += " " + d;
  out.check(differing.empty() && compared >= 10,
            std::to_string(compared) + " artifacts compared" + (differing.empty() ? "" : ", differing:" + list));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"loopsurro acceptance suite"};
  std::string only;
  std::string out_dir = "acceptance_out";
  app.add_option("--only", only, "run a single criterion (c1..c9)");
  app.add_option("--out", out_dir, "directory for artifacts");
  CLI11_PARSE(app, argc, argv);

  const fs::path dir = fs::absolute(out_dir);
  fs::create_directories(dir);

  const std::vector<std::pair<std::string, std::pair<std::string, std::function<Outcome()>>>> criteria{
      {"c1", {"gradient fidelity", [] { return gradient_fidelity(); }}},
      {"c2", {"ambiguity", [&] { return ambiguity(dir); }}},
      {"c3", {"simpleloop convergence", [&] { return simpleloop_convergence(dir); }}},
      {"c4", {"Newton-iteration reduction", [&] { return iteration_reduction(dir); }}},
      {"c5", {"data-generation asymmetry", [] { return generation_asymmetry(); }}},
      {"c6", {"error-control guarantee", [] { return error_control(); }}},
      {"c7", {"connected-solution switching", [&] { return connected_switching(dir); }}},
      {"c8", {"branch pair", [&] { return branch_pair(dir); }}},
      {"c9", {"determinism", [&] { return determinism(dir); }}},
  };

  bool all = true, found = false;
  for (const auto& [id, entry] : criteria) {
    if (!only.empty() && only != id) continue;
    found = true;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = entry.second();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << entry.first << ": "
              << o.detail.str() << " (" << fmt(seconds_since(start)) << " s)" << std::endl;
    all = all && o.pass;
  }
  if (!found) {
    std::cerr << "unknown criterion '" << only << "'\n";
    return 2;
  }
  return all ? 0 : 1;
}
