#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "cli_commands.hpp"
#include "loopsurro/errors.hpp"
#include "loopsurro/problems.hpp"

using namespace loopsurro;
using namespace loopsurro::cli;

namespace {

std::string problem_help() {
  std::string s = "problem name:";
  for (const auto& n : problem_names()) s += " " + n;
  return s;
}

void add_sim_options(CLI::App* cmd, SimulateOptions& o) {
  cmd->add_option("problem", o.problem, problem_help())->required();
  cmd->add_option("--steps", o.steps, "number of time steps")->capture_default_str();
  cmd->add_option("--t0", o.t0, "start time (default: problem's)");
  cmd->add_option("--t1", o.t1, "end time (default: problem's)");
  cmd->add_option("--fallback-atol", o.fallback_atol, "surrogate acceptance atol")
      ->capture_default_str();
  cmd->add_option("--fallback-rtol", o.fallback_rtol, "surrogate acceptance rtol")
      ->capture_default_str();
  cmd->add_flag("--no-warm-start", o.no_warm_start, "seed Newton with the initial guess each step");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surrogate models for algebraic loops: profile, sample, train, simulate, "
               "benchmark, report"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value configuration file (flags take precedence)");

  GlobalOptions g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "directory for all artifacts")->capture_default_str();
  app.add_option("--atol", g.tol.atol, "Newton absolute tolerance")->capture_default_str();
  app.add_option("--rtol", g.tol.rtol, "Newton relative tolerance")->capture_default_str();
  app.add_option("--max-iter", g.tol.max_iterations, "Newton iteration limit")
      ->capture_default_str();

  ProfileOptions po;
  auto* profile = app.add_subcommand("profile", "input bounds from one classical simulation");
  profile->add_option("problem", po.problem, problem_help())->required();
  profile->add_option("--t0", po.t0, "start time")->required();
  profile->add_option("--t1", po.t1, "end time")->required();
  profile->add_option("--steps", po.steps, "grid intervals")->capture_default_str();
  profile->add_option("--margin", po.margin, "widen each interval by this fraction of its width, split over both sides")
      ->capture_default_str();

  SampleOptions so;
  auto* sample = app.add_subcommand("sample", "sample inputs within profiled bounds");
  sample->add_option("problem", so.problem, problem_help())->required();
  sample->add_option("--bounds", so.bounds, "bounds file (default <out-dir>/bounds.kv)");
  sample->add_option("-n,--n", so.n, "number of samples")->capture_default_str();
  sample->add_option("--method", so.method, "sobol or lhs")->capture_default_str();
  sample->add_option("--skip", so.skip, "leading Sobol points to skip")->capture_default_str();
  sample->add_flag("--label", so.label, "solve for labels with Newton");
  sample->add_option("--restarts", so.restarts, "Newton re-draws per failed label")
      ->capture_default_str();
  sample->add_option("--seed-range", so.seed_range,
                     "lo,hi box for Newton seeds (default: from a short classical run)")
      ->delimiter(',')
      ->expected(2);

  TrainOptions to;
  auto* train = app.add_subcommand("train", "train a surrogate bundle");
  train->add_option("problem", to.problem, problem_help())->required();
  train->add_option("--data", to.data, "dataset CSV (default <out-dir>/dataset.csv)");
  train->add_option("--epochs", to.epochs)->capture_default_str();
  train->add_option("--batch-size", to.batch_size)->capture_default_str();
  train->add_option("--lr", to.lr, "initial learning rate")->capture_default_str();
  train->add_option("--mode", to.mode, "residual, supervised, semisupervised or twophase")
      ->capture_default_str();
  train->add_option("--lambda", to.lambda, "semi-supervised blend weight")->capture_default_str();
  train->add_option("--switch-epoch", to.switch_epoch, "two-phase: first residual epoch")
      ->capture_default_str();
  train->add_option("--hidden", to.hidden, "hidden layer sizes")
      ->delimiter(',')
      ->capture_default_str();
  train->add_option("--clusters", to.clusters, "k > 1 trains one network per label cluster")
      ->capture_default_str();
  train->add_flag("--per-branch", to.per_branch, "one network per branch of a piecewise problem");
  train->add_option("--guide-target", to.guide_target, "two-phase target broadcast to all samples")
      ->delimiter(',');
  train->add_option("--validation-steps", to.validation_steps,
                    "grid for the validation trajectory (0 disables)")
      ->capture_default_str();
  train->add_option("--metric-every", to.metric_every)->capture_default_str();
  train->add_option("--probes", to.probes, "inputs used by the Newton-iteration monitor")
      ->capture_default_str();
  train->add_option("--stop-loss", to.stop_loss, "stop once the training loss is below this");
  train->add_flag("--stop-successive", to.stop_successive,
                  "stop once successive predictions agree within the Newton tolerance");
  train->add_option("--stop-iterations", to.stop_iterations,
                    "stop once the mean Newton iterations fall to this");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "classical or surrogate simulation");
  add_sim_options(simulate, sim);
  simulate->add_option("--model", sim.model, "bundle directory; omit for a classical run");

  BenchmarkOptions bo;
  auto* bench = app.add_subcommand("benchmark", "time classical and surrogate simulations");
  add_sim_options(bench, bo.sim);
  bench->add_option("--model", bo.models, "bundle directory (repeatable)");
  bench->add_option("--repeats", bo.repeats)->capture_default_str();

  ReportOptions ro;
  auto* report = app.add_subcommand("report", "summary table and gnuplot data");
  report->add_option("--dir", ro.dir, "artifact directory (default <out-dir>)");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*profile) return cmd_profile(g, po);
    if (*sample) return cmd_sample(g, so);
    if (*train) return cmd_train(g, to);
    if (*simulate) return cmd_simulate(g, sim);
    if (*bench) return cmd_benchmark(g, bo);
    if (*report) return cmd_report(g, ro);
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConsistencyError& e) {
    std::cerr << "consistency error: " << e.what() << "\n";
    return kData;
  } catch (const ShapeError& e) {
    std::cerr << "shape error: " << e.what() << "\n";
    return kData;
  } catch (const GenerationError& e) {
    std::cerr << "data generation error: " << e.what() << "\n";
    return kData;
  } catch (const SelectionError& e) {
    std::cerr << "selection error: " << e.what() << "\n";
    return kData;
  } catch (const DivergedError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const SimulationError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const EvaluationError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "file error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kUsage;
}
