#include "cli_commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>

#include "loopsurro/errors.hpp"
#include "loopsurro/multimodel.hpp"
#include "loopsurro/pca.hpp"
#include "loopsurro/problems.hpp"
#include "loopsurro/sampling.hpp"
#include "loopsurro/simulate.hpp"
#include "loopsurro/textio.hpp"
#include "loopsurro/training.hpp"

#ifndef LOOPSURRO_VERSION
#define LOOPSURRO_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace loopsurro::cli {

namespace {

std::string in_out_dir(const GlobalOptions& g, const std::string& name) {
  return (fs::path(g.out_dir) / name).string();
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

RunManifest new_manifest(const std::string& subcommand, const std::string& problem,
                         const GlobalOptions& g) {
  RunManifest m;
  m.values.set("tool", "loopsurro");
  m.values.set("version", LOOPSURRO_VERSION);
  m.values.set("subcommand", subcommand);
  m.values.set("problem", problem);
  m.values.set_int("seed", static_cast<long long>(g.seed));
  m.values.set("newton.atol", g.tol.atol);
  m.values.set("newton.rtol", g.tol.rtol);
  m.values.set_int("newton.max_iter", static_cast<long long>(g.tol.max_iterations));
  return m;
}

// The timestamp is added after sealing; it is excluded from the hash anyway.
void save_manifest(RunManifest& m, const GlobalOptions& g, const std::string& subcommand) {
  m.values.set("timestamp", utc_timestamp());
  m.save(in_out_dir(g, subcommand + ".manifest"));
}

void ensure_out_dir(const GlobalOptions& g) { fs::create_directories(g.out_dir); }

void require_same_problem(const std::string& expected, const std::string& found,
                          const std::string& artifact, const std::string& artifact_manifest) {
  if (expected != found)
    throw ConsistencyError("problem mismatch: this run is for '" + expected + "' but " + artifact +
                           " (manifest " + (artifact_manifest.empty() ? "?" : artifact_manifest) +
                           ") was produced for '" + found + "'");
}

std::string dataset_manifest(const std::string& path) {
  const KeyValues meta = KeyValues::load(path + ".meta");
  return meta.find("manifest").value_or("");
}

}  // namespace

int cmd_profile(const GlobalOptions& g, const ProfileOptions& o) {
  const Problem problem = make_problem(o.problem);
  ensure_out_dir(g);
  const InputBounds b = profile_bounds(problem, o.t0, o.t1, o.steps, o.margin);

  RunManifest m = new_manifest("profile", problem.system.name, g);
  m.values.set("t0", o.t0);
  m.values.set("t1", o.t1);
  m.values.set_int("steps", static_cast<long long>(o.steps));
  m.values.set("margin_fraction", o.margin);
  m.values.set("output.bounds", "bounds.kv");
  const std::string hash = m.seal();

  KeyValues kv;
  kv.set("manifest", hash);
  kv.set("problem", problem.system.name);
  kv.set("margin_fraction", o.margin);
  for (std::size_t i = 0; i < b.size(); ++i) {
    kv.set("x" + std::to_string(i) + ".min", b.dims[i].min);
    kv.set("x" + std::to_string(i) + ".max", b.dims[i].max);
  }
  kv.save(in_out_dir(g, "bounds.kv"));
  save_manifest(m, g, "profile");
  std::cout << "bounds for " << problem.system.name << ":\n";
  for (std::size_t i = 0; i < b.size(); ++i)
    std::cout << "  x" << i << " in [" << format_double(b.dims[i].min) << ", "
              << format_double(b.dims[i].max) << "]\n";
  return kOk;
}

int cmd_sample(const GlobalOptions& g, const SampleOptions& o) {
  const Problem problem = make_problem(o.problem);
  const SampleMethod method = sample_method_from_string(o.method);
  if (method == SampleMethod::Trajectory)
    throw ConfigError("sample supports sobol and lhs; trajectory data comes from simulate");
  ensure_out_dir(g);
  const std::string bounds_path = o.bounds.empty() ? in_out_dir(g, "bounds.kv") : o.bounds;
  const KeyValues bkv = KeyValues::load(bounds_path);
  require_same_problem(problem.system.name, bkv.get("problem"), bounds_path,
                       bkv.find("manifest").value_or(""));
  InputBounds bounds;
  bounds.margin_fraction = bkv.get_double("margin_fraction");
  for (std::size_t i = 0; i < problem.system.n_in; ++i)
    bounds.dims.push_back({bkv.get_double("x" + std::to_string(i) + ".min"),
                           bkv.get_double("x" + std::to_string(i) + ".max")});

  RunManifest m = new_manifest("sample", problem.system.name, g);
  m.values.set("input.bounds", bounds_path);
  m.values.set("input.bounds.manifest", bkv.find("manifest").value_or(""));
  m.values.set_int("n", static_cast<long long>(o.n));
  m.values.set("method", o.method);
  m.values.set_int("skip", static_cast<long long>(o.skip));
  m.values.set("label", o.label ? "true" : "false");
  m.values.set_int("restarts", static_cast<long long>(o.restarts));
  m.values.set("seed_range", join(o.seed_range));
  m.values.set("output.dataset", "dataset.csv");
  const std::string hash = m.seal();

  Dataset data = method == SampleMethod::Sobol ? sobol_dataset(bounds, o.n, o.skip)
                                               : lhs_dataset(bounds, o.n, g.seed);
  data.problem = problem.system.name;
  const double sampling_ms = data.generation_ms;
  if (o.label) {
    LabelOptions lo;
    lo.tol = g.tol;
    lo.restarts = o.restarts;
    lo.seed = g.seed;
    if (o.seed_range.empty()) {
      lo.seed_range = estimate_output_range(problem);
    } else {
      if (o.seed_range.size() != 2 || !(o.seed_range[0] <= o.seed_range[1]))
        throw ConfigError("--seed-range expects two values lo,hi with lo <= hi");
      lo.seed_range.assign(problem.system.n_out, Interval{o.seed_range[0], o.seed_range[1]});
    }
    data = generate_labeled(problem.system, data, lo);
    std::cout << "labeled " << data.size() << " samples (" << data.failed << " dropped)\n";
  }
  save_dataset(data, in_out_dir(g, "dataset.csv"), hash);
  save_manifest(m, g, "sample");
  std::cout << "wrote " << data.size() << " samples; sampling " << format_double(sampling_ms)
            << " ms";
  if (o.label) std::cout << ", labeling " << format_double(data.generation_ms) << " ms";
  std::cout << "\n";
  return kOk;
}

int cmd_train(const GlobalOptions& g, const TrainOptions& o) {
  const Problem problem = make_problem(o.problem);
  const ResidualSystem& system = problem.system;
  ensure_out_dir(g);
  const std::string data_path = o.data.empty() ? in_out_dir(g, "dataset.csv") : o.data;
  const Dataset data = load_dataset(data_path);
  const std::string data_manifest = dataset_manifest(data_path);
  require_same_problem(system.name, data.problem, data_path, data_manifest);

  TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch_size;
  cfg.schedule.initial_lr = o.lr;
  cfg.mode = loss_mode_from_string(o.mode);
  cfg.lambda = o.lambda;
  cfg.switch_epoch = o.switch_epoch;
  cfg.tol = g.tol;
  cfg.metric_every = o.metric_every;
  cfg.probe_count = o.probes;
  cfg.seed = g.seed;
  cfg.hidden = o.hidden;
  cfg.stop.loss_below = o.stop_loss;
  cfg.stop.successive = o.stop_successive;
  cfg.stop.iteration_target = o.stop_iterations;
  if (!o.guide_target.empty()) {
    if (o.guide_target.size() != system.n_out)
      throw ConfigError("--guide-target needs " + std::to_string(system.n_out) + " values");
    cfg.guidance = Matrix::column(o.guide_target);
  }
  if ((cfg.mode == LossMode::Supervised || cfg.mode == LossMode::SemiSupervised) &&
      !data.labeled())
    throw ConsistencyError(o.mode + " training needs a labeled dataset; " + data_path +
                           " (manifest " + data_manifest + ") has no labels");
  if (o.clusters > 1 && !data.labeled())
    throw ConsistencyError("per-cluster training needs a labeled dataset");
  if (o.clusters > 1 && o.per_branch)
    throw ConfigError("--clusters and --per-branch are mutually exclusive");

  RunManifest m = new_manifest("train", system.name, g);
  m.values.set("input.dataset", data_path);
  m.values.set("input.dataset.manifest", data_manifest);
  m.values.set_int("epochs", static_cast<long long>(o.epochs));
  m.values.set_int("batch_size", static_cast<long long>(o.batch_size));
  m.values.set("lr", o.lr);
  m.values.set("lr.decay_factor", cfg.schedule.decay_factor);
  m.values.set("lr.decay_start_fraction", cfg.schedule.decay_start_fraction);
  m.values.set("lr.decay_interval_fraction", cfg.schedule.decay_interval_fraction);
  m.values.set("mode", o.mode);
  m.values.set("lambda", o.lambda);
  m.values.set_int("switch_epoch", static_cast<long long>(o.switch_epoch));
  m.values.set("hidden", join(o.hidden));
  m.values.set_int("clusters", static_cast<long long>(o.clusters));
  m.values.set("per_branch", o.per_branch ? "true" : "false");
  m.values.set("guide_target", join(o.guide_target));
  m.values.set_int("validation_steps", static_cast<long long>(o.validation_steps));
  m.values.set_int("metric_every", static_cast<long long>(o.metric_every));
  m.values.set_int("probes", static_cast<long long>(o.probes));
  m.values.set("stop.loss", o.stop_loss ? format_double(*o.stop_loss) : "");
  m.values.set("stop.successive", o.stop_successive ? "true" : "false");
  m.values.set("stop.iterations", o.stop_iterations ? format_double(*o.stop_iterations) : "");
  m.values.set("output.model", "model");
  const std::string hash = m.seal();

  std::optional<Dataset> validation;
  if (o.validation_steps > 0)
    validation = trajectory_dataset(problem, problem.dynamics.t0, problem.dynamics.t1,
                                    o.validation_steps);
  const Dataset* val = validation ? &*validation : nullptr;

  SurrogateBundle bundle;
  std::vector<TrainReport> reports;
  if (o.clusters > 1) {
    MultiTrainResult r = train_per_cluster(system, data, o.clusters, cfg);
    bundle = std::move(r.bundle);
    reports = std::move(r.reports);
  } else if (o.per_branch) {
    if (system.branches.empty())
      throw ConfigError("--per-branch needs a piecewise problem");
    std::vector<std::vector<std::size_t>> idx(system.branches.size());
    for (std::size_t j = 0; j < data.size(); ++j) {
      const int b = system.branch_of(data.inputs.col(j));
      idx.at(static_cast<std::size_t>(b)).push_back(j);
    }
    std::vector<Dataset> parts;
    std::vector<Matrix> guidance;
    for (const auto& cols : idx) {
      Dataset part = data;
      part.inputs = data.inputs.select_cols(cols);
      if (data.labels) part.labels = data.labels->select_cols(cols);
      parts.push_back(std::move(part));
      guidance.push_back(cfg.mode == LossMode::TwoPhase ? cfg.guidance : Matrix());
    }
    MultiTrainResult r = train_per_branch(system, parts, guidance, cfg);
    bundle = std::move(r.bundle);
    reports = std::move(r.reports);
  } else {
    MlpNetwork net = make_surrogate_network(system, cfg.hidden, cfg.seed);
    reports.push_back(train(system, data, val, net, cfg));
    bundle = single_bundle(system, std::move(net));
  }

  save_bundle(bundle, in_out_dir(g, "model"), hash);
  bool diverged = false;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const std::string name =
        reports.size() == 1 ? "train_report.csv" : "train_report_" + std::to_string(i) + ".csv";
    reports[i].save_csv(in_out_dir(g, name), hash);
    std::cout << name << ": " << reports[i].epochs_run << " epochs, final loss "
              << format_double(reports[i].final_train_loss()) << ", stop "
              << to_string(reports[i].stop_reason) << "\n";
    if (reports[i].stop_reason == StopReason::Diverged) {
      diverged = true;
      std::cerr << "training diverged: " << reports[i].diverged_message << "\n";
    }
  }
  save_manifest(m, g, "train");
  return diverged ? kNumerical : kOk;
}

namespace {

SimConfig sim_config(const Problem& problem, const GlobalOptions& g, const SimulateOptions& o) {
  SimConfig c = SimConfig::for_problem(problem, o.steps);
  if (o.t0) c.t0 = *o.t0;
  if (o.t1) c.t1 = *o.t1;
  c.newton_tol = g.tol;
  c.fallback_tol = {o.fallback_atol, o.fallback_rtol, g.tol.max_iterations};
  c.warm_start = !o.no_warm_start;
  return c;
}

void add_sim_fields(RunManifest& m, const SimConfig& c) {
  m.values.set("t0", c.t0);
  m.values.set("t1", c.t1);
  m.values.set_int("steps", static_cast<long long>(c.num_steps));
  m.values.set("fallback.atol", c.fallback_tol.atol);
  m.values.set("fallback.rtol", c.fallback_tol.rtol);
  m.values.set("warm_start", c.warm_start ? "true" : "false");
}

SurrogateBundle load_checked_bundle(const std::string& dir, const ResidualSystem& system) {
  const SurrogateBundle b = load_bundle(dir);
  const KeyValues kv = KeyValues::load(dir + "/manifest.kv");
  require_same_problem(system.name, b.problem, dir, kv.find("manifest").value_or(""));
  b.check_compatible(system);
  return b;
}

}  // namespace

int cmd_simulate(const GlobalOptions& g, const SimulateOptions& o) {
  const Problem problem = make_problem(o.problem);
  ensure_out_dir(g);
  const SimConfig c = sim_config(problem, g, o);
  std::optional<SurrogateBundle> bundle;
  if (!o.model.empty()) bundle = load_checked_bundle(o.model, problem.system);

  RunManifest m = new_manifest("simulate", problem.system.name, g);
  add_sim_fields(m, c);
  m.values.set("input.model", o.model);
  if (bundle)
    m.values.set("input.model.manifest",
                 KeyValues::load(o.model + "/manifest.kv").find("manifest").value_or(""));
  m.values.set("output.trajectory", "trajectory.csv");
  if (bundle) m.values.set("output.reference", "reference.csv");
  const std::string hash = m.seal();

  const Trajectory reference = simulate_classical(problem, c);
  if (bundle) {
    const Trajectory tr = simulate_surrogate(problem, *bundle, c);
    tr.save_csv(in_out_dir(g, "trajectory.csv"), hash);
    reference.save_csv(in_out_dir(g, "reference.csv"), hash);
    const auto cmp = compare_trajectories(reference, tr, c.fallback_tol);
    std::cout << "surrogate run: fallback rate " << format_double(tr.fallback_rate)
              << ", Newton iterations " << tr.total_iterations() << " (classical "
              << reference.total_iterations() << "), max |y - y_ref| "
              << format_double(cmp.max_abs) << "\n";
  } else {
    reference.save_csv(in_out_dir(g, "trajectory.csv"), hash);
    std::cout << "classical run: " << reference.steps() << " steps, Newton iterations "
              << reference.total_iterations() << "\n";
  }
  save_manifest(m, g, "simulate");
  return kOk;
}

int cmd_benchmark(const GlobalOptions& g, const BenchmarkOptions& o) {
  const Problem problem = make_problem(o.sim.problem);
  ensure_out_dir(g);
  const SimConfig c = sim_config(problem, g, o.sim);
  std::vector<BenchmarkVariant> variants;
  variants.push_back({"classical", std::nullopt});
  for (const auto& dir : o.models) {
    std::string name = fs::path(dir).filename().string();
    if (name.empty()) name = fs::path(dir).parent_path().filename().string();
    variants.push_back({"surrogate:" + name, load_checked_bundle(dir, problem.system)});
  }

  RunManifest m = new_manifest("benchmark", problem.system.name, g);
  add_sim_fields(m, c);
  for (std::size_t i = 0; i < o.models.size(); ++i)
    m.values.set("input.model." + std::to_string(i), o.models[i]);
  m.values.set_int("repeats", static_cast<long long>(o.repeats));
  m.values.set("output.benchmark", "benchmark.csv");
  const std::string hash = m.seal();

  const BenchmarkReport report = benchmark(problem, variants, c, o.repeats);
  report.save_csv(in_out_dir(g, "benchmark.csv"), hash);
  for (const auto& s : report.summary())
    std::cout << s.variant << ": mean " << format_double(s.mean_ms) << " ms, min "
              << format_double(s.min_ms) << " ms, Newton iterations "
              << format_double(s.mean_newton_iters) << ", fallback rate "
              << format_double(s.mean_fallback_rate) << "\n";
  save_manifest(m, g, "benchmark");
  return kOk;
}

namespace {

constexpr std::size_t kMaxScatterPoints = 2000;

std::vector<std::string> train_reports_in(const fs::path& dir) {
  std::vector<std::string> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("train_report", 0) == 0 && e.path().extension() == ".csv")
      out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string gp_header(const std::string& png, const std::string& title) {
  return "set terminal pngcairo size 900,600\nset output '" + png + "'\nset title '" + title +
         "'\nset grid\n";
}

}  // namespace

int cmd_report(const GlobalOptions& g, const ReportOptions& o) {
  const fs::path dir = o.dir.empty() ? fs::path(g.out_dir) : fs::path(o.dir);
  if (!fs::is_directory(dir)) throw ConsistencyError("report: no such directory " + dir.string());
  const fs::path out = dir / "report";
  fs::create_directories(out);
  KeyValues summary;
  std::string problem_name;
  for (const char* sub : {"train", "simulate", "sample", "benchmark", "profile"}) {
    const fs::path mp = dir / (std::string(sub) + ".manifest");
    if (fs::exists(mp) && problem_name.empty())
      problem_name = KeyValues::load(mp.string()).get("problem");
  }
  summary.set("problem", problem_name);

  // Loss curves.
  const auto reports = train_reports_in(dir);
  for (std::size_t r = 0; r < reports.size(); ++r) {
    const CsvTable t = read_csv(reports[r]);
    const std::string stem = fs::path(reports[r]).stem().string();
    std::string dat = "# epoch train_loss val_loss lr newton_metric\n";
    for (const auto& row : t.rows)
      dat += row[0] + " " + row[1] + " " + row[2] + " " + row[3] + " " +
             (row[4].empty() ? "nan" : row[4]) + "\n";
    write_text_file((out / (stem + ".dat")).string(), dat);
    write_text_file((out / (stem + ".gp")).string(),
                    gp_header(stem + ".png", "training loss") +
                        "set logscale y\nset xlabel 'epoch'\nset ylabel 'loss'\nplot '" + stem +
                        ".dat' using 1:2 with lines title 'train', '' using 1:3 with lines "
                        "title 'validation (residual)'\n");
    if (!t.rows.empty()) {
      summary.set(stem + ".epochs", std::to_string(t.rows.size()));
      summary.set(stem + ".final_train_loss", t.rows.back()[1]);
      summary.set(stem + ".final_val_loss", t.rows.back()[2]);
      for (auto it = t.rows.rbegin(); it != t.rows.rend(); ++it)
        if (!(*it)[4].empty()) {
          summary.set(stem + ".final_newton_metric", (*it)[4]);
          break;
        }
    }
  }

  // Trajectory overlay.
  if (fs::exists(dir / "trajectory.csv")) {
    const CsvTable tr = read_csv((dir / "trajectory.csv").string());
    std::optional<CsvTable> ref;
    if (fs::exists(dir / "reference.csv")) ref = read_csv((dir / "reference.csv").string());
    std::vector<std::size_t> ycols;
    for (std::size_t i = 0; i < tr.header.size(); ++i)
      if (tr.header[i][0] == 'y') ycols.push_back(i);
    std::string dat = "# t y.. [y_ref..] source\n";
    std::size_t fallback = 0;
    for (std::size_t k = 0; k < tr.rows.size(); ++k) {
      dat += tr.rows[k][0];
      for (std::size_t c : ycols) dat += " " + tr.rows[k][c];
      if (ref)
        for (std::size_t c : ycols) dat += " " + ref->rows[k][c];
      const std::string& src = tr.rows[k][tr.column("source")];
      fallback += src == "fallback" ? 1 : 0;
      dat += " " + src + "\n";
    }
    write_text_file((out / "trajectory.dat").string(), dat);
    std::string plot = gp_header("trajectory.png", "trajectory") + "set xlabel 't'\nplot ";
    for (std::size_t i = 0; i < ycols.size(); ++i) {
      plot += (i ? ", " : "") + std::string("'trajectory.dat' using 1:") + std::to_string(i + 2) +
              " with lines title '" + tr.header[ycols[i]] + "'";
      if (ref)
        plot += ", '' using 1:" + std::to_string(i + 2 + ycols.size()) +
                " with points pt 6 title '" + tr.header[ycols[i]] + " reference'";
    }
    write_text_file((out / "trajectory.gp").string(), plot + "\n");
    summary.set("trajectory.steps", std::to_string(tr.rows.size()));
    summary.set("trajectory.fallback_rate",
                format_double(static_cast<double>(fallback) / static_cast<double>(tr.rows.size())));
  }

  // Prediction scatter and PCA of the dataset labels.
  if (fs::exists(dir / "dataset.csv") && !problem_name.empty()) {
    const Dataset data = load_dataset((dir / "dataset.csv").string());
    const Problem problem = make_problem(problem_name);
    const std::size_t n = std::min(data.size(), kMaxScatterPoints);
    std::vector<std::size_t> cols(n);
    for (std::size_t k = 0; k < n; ++k) cols[k] = k * data.size() / n;
    const Matrix x = data.inputs.select_cols(cols);
    std::optional<Matrix> pred;
    std::optional<SurrogateBundle> bundle;
    if (fs::exists(dir / "model" / "manifest.kv")) {
      bundle = load_bundle((dir / "model").string());
      if (bundle->problem == problem.system.name && bundle->networks.size() == 1)
        pred = predict(problem.system, bundle->networks.front(), x);
    }
    if (pred || data.labeled()) {
      std::string dat = "# features.. [labels..] [predictions..]\n";
      for (std::size_t k = 0; k < n; ++k) {
        std::string line;
        for (std::size_t f : problem.system.feature_indices) line += format_double(x(f, k)) + " ";
        if (data.labeled())
          for (double v : data.labels->col(cols[k])) line += format_double(v) + " ";
        if (pred)
          for (double v : pred->col(k)) line += format_double(v) + " ";
        line.back() = '\n';
        dat += line;
      }
      write_text_file((out / "scatter.dat").string(), dat);
      const std::size_t nf = problem.system.feature_dim();
      const std::size_t ycol = nf + 1;
      std::string plot = gp_header("scatter.png", "outputs over the first feature") +
                         "set xlabel 'feature 0'\nplot ";
      if (data.labeled())
        plot += "'scatter.dat' using 1:" + std::to_string(ycol) + " with points pt 7 ps 0.3 title 'label'";
      if (pred)
        plot += std::string(data.labeled() ? ", " : "") + "'scatter.dat' using 1:" +
                std::to_string(ycol + (data.labeled() ? problem.system.n_out : 0)) +
                " with points pt 7 ps 0.3 title 'prediction'";
      write_text_file((out / "scatter.gp").string(), plot + "\n");
    }
    if (data.labeled() && data.labels->rows() >= 2 && n >= 3) {
      const Matrix y = data.labels->select_cols(cols);
      const PcaProjection p = pca_project_2d(y);
      std::string dat = "# pc1 pc2 cluster\n";
      for (std::size_t k = 0; k < n; ++k) {
        std::size_t cluster = 0;
        if (bundle && bundle->selector == SelectorKind::ByCentroid)
          cluster = select_by_centroid(*bundle, y.col(k));
        dat += format_double(p.projected(0, k)) + " " + format_double(p.projected(1, k)) + " " +
               std::to_string(cluster) + "\n";
      }
      write_text_file((out / "pca.dat").string(), dat);
      write_text_file((out / "pca.gp").string(),
                      gp_header("pca.png", "labels, first two principal components") +
                          "set xlabel 'PC1'\nset ylabel 'PC2'\nplot 'pca.dat' using 1:2:3 with "
                          "points pt 7 ps 0.4 palette notitle\n");
      summary.set("pca.explained_1", p.explained[0]);
      summary.set("pca.explained_2", p.explained[1]);
    }
  }

  // Benchmark table.
  if (fs::exists(dir / "benchmark.csv")) {
    const CsvTable t = read_csv((dir / "benchmark.csv").string());
    BenchmarkReport rep;
    for (const auto& row : t.rows)
      rep.rows.push_back({row[0], static_cast<std::size_t>(std::stoull(row[1])),
                          parse_double(row[2]), static_cast<std::size_t>(std::stoull(row[3])),
                          parse_double(row[4])});
    std::string dat = "# variant mean_ms min_ms mean_newton_iters mean_fallback_rate\n";
    for (const auto& s : rep.summary()) {
      dat += s.variant + " " + format_double(s.mean_ms) + " " + format_double(s.min_ms) + " " +
             format_double(s.mean_newton_iters) + " " + format_double(s.mean_fallback_rate) + "\n";
      summary.set("benchmark." + s.variant + ".mean_ms", s.mean_ms);
      summary.set("benchmark." + s.variant + ".mean_newton_iters", s.mean_newton_iters);
      summary.set("benchmark." + s.variant + ".fallback_rate", s.mean_fallback_rate);
    }
    write_text_file((out / "benchmark.dat").string(), dat);
  }

  summary.save((out / "summary.txt").string());
  std::cout << summary.to_string();
  return kOk;
}

}  // namespace loopsurro::cli
