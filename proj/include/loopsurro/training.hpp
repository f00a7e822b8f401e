#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "loopsurro/adam.hpp"
#include "loopsurro/mlp.hpp"
#include "loopsurro/newton.hpp"
#include "loopsurro/problems.hpp"
#include "loopsurro/sampling.hpp"

namespace loopsurro {

enum class LossMode { Residual, Supervised, SemiSupervised, TwoPhase };
std::string to_string(LossMode m);
LossMode loss_mode_from_string(const std::string& s);

// Early-stop criteria; all off by default so runs last config.epochs.
struct EarlyStop {
  std::optional<double> loss_below;        // training loss threshold
  bool successive = false;                 // predictions stop moving (config.tol)
  std::optional<double> iteration_target;  // mean Newton iterations on probes
};

struct TrainConfig {
  std::size_t epochs = 1000;
  std::size_t batch_size = 100;
  // total_epochs is taken from `epochs` when training.
  LrSchedule schedule;
  LossMode mode = LossMode::Residual;
  double lambda = 1.0;           // SemiSupervised only
  std::size_t switch_epoch = 0;  // TwoPhase: first residual epoch
  // TwoPhase phase-1 targets: one column (broadcast) or one per sample. When
  // empty the dataset labels are used.
  Matrix guidance;
  ToleranceSpec tol{1e-6, 1e-4, 100};
  std::size_t metric_every = 50;
  std::size_t probe_count = 100;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden = {160, 160};
  EarlyStop stop;

  void validate(std::size_t dataset_size) const;
};

enum class StopReason {
  Completed,
  AbsoluteTolReached,
  SuccessiveConverged,
  IterationTargetReached,
  Diverged
};
std::string to_string(StopReason r);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // sample-weighted mean of the batch losses
  double val_loss = 0.0;    // residual loss on the validation set (NaN without one)
  double lr = 0.0;
  std::optional<double> newton_metric;
  std::optional<bool> successive;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainReport {
  std::vector<EpochRecord> history;
  std::size_t epochs_run = 0;
  StopReason stop_reason = StopReason::Completed;
  std::optional<std::size_t> switch_epoch;
  std::string diverged_message;

  double final_train_loss() const;
  void save_csv(const std::string& path, const std::string& manifest_hash = "") const;
};

// Network sized for the system: feature_dim -> hidden... -> n_out.
MlpNetwork make_surrogate_network(const ResidualSystem& system,
                                  const std::vector<std::size_t>& hidden, std::uint64_t seed);

// Mini-batch Adam. Each epoch reshuffles with a seeded Fisher-Yates pass.
// Monitors run every metric_every epochs on probe inputs taken from the
// validation set (or the training set without one). A non-finite loss or
// gradient stops training with StopReason::Diverged and keeps the last good
// parameters.
TrainReport train(const ResidualSystem& system, const Dataset& data, const Dataset* validation,
                  MlpNetwork& net, const TrainConfig& config);

// train() in TwoPhase mode with the given phase-1 targets.
TrainReport two_phase_train(const ResidualSystem& system, const Matrix& guidance,
                            const Dataset& data, const Dataset* validation, MlpNetwork& net,
                            TrainConfig config);

// |now - prev| <= atol + rtol |prev| for every component.
bool successive_convergence(const Matrix& prev, const Matrix& now, const ToleranceSpec& tol);

// Mean Newton iterations when seeding with the network's predictions.
double iteration_metric(const ResidualSystem& system, const MlpNetwork& net,
                        const Matrix& probe_inputs, const ToleranceSpec& tol);

// Network output for system inputs (rows picked by feature_indices).
Matrix predict(const ResidualSystem& system, const MlpNetwork& net, const Matrix& x);

}  // namespace loopsurro
