#include "loopsurro/training.hpp"

#include <cmath>
#include <limits>

#include "loopsurro/errors.hpp"
#include "loopsurro/losses.hpp"
#include "loopsurro/rng.hpp"
#include "loopsurro/textio.hpp"

namespace loopsurro {

std::string to_string(LossMode m) {
  switch (m) {
    case LossMode::Residual: return "residual";
    case LossMode::Supervised: return "supervised";
    case LossMode::SemiSupervised: return "semisupervised";
    case LossMode::TwoPhase: return "twophase";
  }
  return "?";
}

LossMode loss_mode_from_string(const std::string& s) {
  if (s == "residual") return LossMode::Residual;
  if (s == "supervised") return LossMode::Supervised;
  if (s == "semisupervised") return LossMode::SemiSupervised;
  if (s == "twophase") return LossMode::TwoPhase;
  throw ConfigError("unknown loss mode '" + s +
                    "' (expected residual, supervised, semisupervised or twophase)");
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::Completed: return "completed";
    case StopReason::AbsoluteTolReached: return "absolute_tol";
    case StopReason::SuccessiveConverged: return "successive";
    case StopReason::IterationTargetReached: return "iteration_target";
    case StopReason::Diverged: return "diverged";
  }
  return "?";
}

void TrainConfig::validate(std::size_t dataset_size) const {
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (dataset_size == 0) throw ConfigError("training dataset is empty");
  if (batch_size > dataset_size)
    throw ConfigError("batch_size " + std::to_string(batch_size) + " exceeds dataset size " +
                      std::to_string(dataset_size));
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
  if (mode == LossMode::TwoPhase && epochs > 0 && switch_epoch >= epochs)
    throw ConfigError("switch_epoch must be below epochs");
  if (metric_every == 0) throw ConfigError("metric_every must be at least 1");
  if (probe_count == 0) throw ConfigError("probe_count must be at least 1");
  for (std::size_t h : hidden)
    if (h == 0) throw ConfigError("hidden layer sizes must be positive");
  tol.validate();
  if (epochs > 0) {
    LrSchedule s = schedule;
    s.total_epochs = epochs;
    s.validate();
  }
}

double TrainReport::final_train_loss() const {
  return history.empty() ? std::numeric_limits<double>::quiet_NaN() : history.back().train_loss;
}

void TrainReport::save_csv(const std::string& path, const std::string& manifest_hash) const {
  CsvTable t;
  if (!manifest_hash.empty()) t.comments.push_back("manifest " + manifest_hash);
  t.header = {"epoch", "train_loss", "val_loss", "lr", "newton_metric"};
  for (const auto& r : history)
    t.rows.push_back({std::to_string(r.epoch), format_double(r.train_loss),
                      format_double(r.val_loss), format_double(r.lr),
                      r.newton_metric ? format_double(*r.newton_metric) : ""});
  write_csv(path, t);
}

MlpNetwork make_surrogate_network(const ResidualSystem& system,
                                  const std::vector<std::size_t>& hidden, std::uint64_t seed) {
  std::vector<std::size_t> sizes;
  sizes.push_back(system.feature_dim());
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(system.n_out);
  return init_network(sizes, Activation::ReLU, seed);
}

Matrix predict(const ResidualSystem& system, const MlpNetwork& net, const Matrix& x) {
  return forward(net, system.features(x));
}

bool successive_convergence(const Matrix& prev, const Matrix& now, const ToleranceSpec& tol) {
  if (prev.rows() != now.rows() || prev.cols() != now.cols())
    throw ShapeError("successive_convergence: shape mismatch");
  for (std::size_t k = 0; k < prev.size(); ++k) {
    const double p = prev.data()[k];
    if (!(std::abs(now.data()[k] - p) <= tol.atol + tol.rtol * std::abs(p))) return false;
  }
  return true;
}

double iteration_metric(const ResidualSystem& system, const MlpNetwork& net,
                        const Matrix& probe_inputs, const ToleranceSpec& tol) {
  if (probe_inputs.cols() == 0) throw ConfigError("iteration_metric: empty probe set");
  return newton_iterations_from(system, probe_inputs, predict(system, net, probe_inputs), tol).mean;
}

namespace {

Matrix pick_probes(const Matrix& x, std::size_t count) {
  const std::size_t n = x.cols();
  if (count >= n) return x;
  std::vector<std::size_t> idx(count);
  for (std::size_t k = 0; k < count; ++k) idx[k] = k * n / count;
  return x.select_cols(idx);
}

}  // namespace

TrainReport train(const ResidualSystem& system, const Dataset& data, const Dataset* validation,
                  MlpNetwork& net, const TrainConfig& config) {
  TrainReport report;
  if (config.epochs == 0) return report;
  config.validate(data.size());
  net.validate();
  if (net.input_dim() != system.feature_dim() || net.output_dim() != system.n_out)
    throw ShapeError("network " + std::to_string(net.input_dim()) + " -> " +
                     std::to_string(net.output_dim()) + " does not fit system " + system.name);
  if (data.inputs.rows() != system.n_in)
    throw ShapeError("dataset inputs do not match system " + system.name);

  const std::size_t n = data.size();
  const Matrix features = system.features(data.inputs);

  const Matrix* targets = nullptr;
  if (config.mode == LossMode::Supervised || config.mode == LossMode::SemiSupervised) {
    if (!data.labels) throw ConsistencyError(to_string(config.mode) + " training needs labels");
    targets = &*data.labels;
  } else if (config.mode == LossMode::TwoPhase && config.switch_epoch > 0) {
    if (!config.guidance.empty()) targets = &config.guidance;
    else if (data.labels) targets = &*data.labels;
    else throw ConsistencyError("two-phase training needs guidance targets or labels");
  }
  if (targets) {
    if (targets->rows() != system.n_out || (targets->cols() != n && targets->cols() != 1))
      throw ShapeError("targets must have one column or one per sample");
  }
  const bool broadcast_targets = targets && targets->cols() == 1;

  LrSchedule schedule = config.schedule;
  schedule.total_epochs = config.epochs;
  if (config.mode == LossMode::TwoPhase) report.switch_epoch = config.switch_epoch;

  const Matrix probes = pick_probes(validation ? validation->inputs : data.inputs,
                                    config.probe_count);
  Matrix val_features;
  if (validation) val_features = system.features(validation->inputs);
  std::optional<Matrix> last_probe_pred;

  AdamState adam = AdamState::for_network(net);
  Rng rng(config.seed);
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = k;

  ForwardCache cache;
  Matrix grad;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_at_epoch(schedule, epoch);
    rng.shuffle(order);

    enum class Phase { Residual, Mse, Blend } phase = Phase::Residual;
    double lambda = 1.0;
    switch (config.mode) {
      case LossMode::Residual: break;
      case LossMode::Supervised: phase = Phase::Mse; break;
      case LossMode::SemiSupervised:
        phase = Phase::Blend;
        lambda = config.lambda;
        break;
      case LossMode::TwoPhase:
        phase = epoch < config.switch_epoch ? Phase::Mse : Phase::Residual;
        break;
    }

    std::vector<double> batch_loss;
    std::vector<std::size_t> batch_idx;
    try {
      for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
        const std::size_t count = std::min(config.batch_size, n - begin);
        batch_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(begin),
                         order.begin() + static_cast<std::ptrdiff_t>(begin + count));
        const Matrix xb = data.inputs.select_cols(batch_idx);
        const Matrix yhat = forward(net, features.select_cols(batch_idx), &cache);
        Matrix yb;
        if (targets) yb = broadcast_targets ? *targets : targets->select_cols(batch_idx);

        double loss = 0.0;
        switch (phase) {
          case Phase::Residual: loss = residual_loss_and_gradient(system, xb, yhat, grad); break;
          case Phase::Mse:
            loss = mse_loss(yhat, yb);
            grad = mse_loss_gradient(yhat, yb);
            break;
          case Phase::Blend:
            loss = semi_supervised_loss_and_gradient(system, xb, yhat, &yb, lambda, grad);
            break;
        }
        if (!std::isfinite(loss)) throw DivergedError("non-finite training loss");
        const ParameterSet g = backward_with_output_gradient(net, cache, grad);
        adam_step(net, g, adam, lr);
        batch_loss.push_back(loss * static_cast<double>(count));
      }
    } catch (const DivergedError& e) {
      report.stop_reason = StopReason::Diverged;
      report.diverged_message = "epoch " + std::to_string(epoch) + ": " + e.what();
      break;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = pairwise_sum(batch_loss) / static_cast<double>(n);
    rec.val_loss = std::numeric_limits<double>::quiet_NaN();
    if (validation) {
      try {
        rec.val_loss = residual_loss(system, validation->inputs, forward(net, val_features));
      } catch (const DivergedError&) {
      }
    }

    StopReason stop = StopReason::Completed;
    if (config.stop.loss_below && rec.train_loss <= *config.stop.loss_below)
      stop = StopReason::AbsoluteTolReached;
    if ((epoch + 1) % config.metric_every == 0) {
      const Matrix pred = predict(system, net, probes);
      rec.newton_metric =
          newton_iterations_from(system, probes, pred, config.tol).mean;
      if (last_probe_pred) {
        rec.successive = successive_convergence(*last_probe_pred, pred, config.tol);
        if (config.stop.successive && *rec.successive && stop == StopReason::Completed)
          stop = StopReason::SuccessiveConverged;
      }
      if (config.stop.iteration_target && *rec.newton_metric <= *config.stop.iteration_target &&
          stop == StopReason::Completed)
        stop = StopReason::IterationTargetReached;
      last_probe_pred = pred;
    }
    report.history.push_back(rec);
    if (stop != StopReason::Completed) {
      report.stop_reason = stop;
      break;
    }
  }
  report.epochs_run = report.history.size();
  return report;
}

TrainReport two_phase_train(const ResidualSystem& system, const Matrix& guidance,
                            const Dataset& data, const Dataset* validation, MlpNetwork& net,
                            TrainConfig config) {
  config.mode = LossMode::TwoPhase;
  config.guidance = guidance;
  return train(system, data, validation, net, config);
}

}  // namespace loopsurro
