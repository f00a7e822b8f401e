#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "loopsurro/newton.hpp"

namespace loopsurro::cli {

// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  ToleranceSpec tol;
};

struct ProfileOptions {
  std::string problem;
  double t0 = 0.0;
  double t1 = 0.0;
  std::size_t steps = 1000;
  double margin = 0.0;
};

struct SampleOptions {
  std::string problem;
  std::string bounds;  // default <out-dir>/bounds.kv
  std::size_t n = 10000;
  std::string method = "sobol";
  std::size_t skip = 1;
  bool label = false;
  std::size_t restarts = 3;
  std::vector<double> seed_range;  // lo, hi applied to every output
};

struct TrainOptions {
  std::string problem;
  std::string data;  // default <out-dir>/dataset.csv
  std::size_t epochs = 1000;
  std::size_t batch_size = 100;
  double lr = 8e-4;
  std::string mode = "residual";
  double lambda = 1.0;
  std::size_t switch_epoch = 0;
  std::vector<std::size_t> hidden = {160, 160};
  std::size_t clusters = 1;
  bool per_branch = false;
  std::vector<double> guide_target;
  std::size_t validation_steps = 200;
  std::size_t metric_every = 50;
  std::size_t probes = 100;
  std::optional<double> stop_loss;
  bool stop_successive = false;
  std::optional<double> stop_iterations;
};

struct SimulateOptions {
  std::string problem;
  std::string model;
  std::size_t steps = 200;
  std::optional<double> t0;
  std::optional<double> t1;
  double fallback_atol = 1e-6;
  double fallback_rtol = 1e-4;
  bool no_warm_start = false;
};

struct BenchmarkOptions {
  SimulateOptions sim;
  std::vector<std::string> models;
  std::size_t repeats = 5;
};

struct ReportOptions {
  std::string dir;  // default <out-dir>
};

int cmd_profile(const GlobalOptions& g, const ProfileOptions& o);
int cmd_sample(const GlobalOptions& g, const SampleOptions& o);
int cmd_train(const GlobalOptions& g, const TrainOptions& o);
int cmd_simulate(const GlobalOptions& g, const SimulateOptions& o);
int cmd_benchmark(const GlobalOptions& g, const BenchmarkOptions& o);
int cmd_report(const GlobalOptions& g, const ReportOptions& o);

}  // namespace loopsurro::cli
