#include "loopsurro/adam.hpp"

#include <cmath>
#include <string>

#include "loopsurro/errors.hpp"

namespace loopsurro {

AdamState AdamState::for_network(const MlpNetwork& net) {
  AdamState s;
  s.first_moment = ParameterSet::zeros_like(net);
  s.second_moment = ParameterSet::zeros_like(net);
  return s;
}

namespace {

void check_finite(std::span<const double> g, std::size_t layer, const char* block) {
  for (double v : g)
    if (!std::isfinite(v))
      throw DivergedError("non-finite gradient in layer " + std::to_string(layer) + " " + block);
}

void update(std::span<double> param, std::span<const double> grad, std::span<double> m,
            std::span<double> v, const AdamState& s, double step_size, double bc2_sqrt) {
  const double b1 = s.beta1, b2 = s.beta2;
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    m[i] = b1 * m[i] + (1.0 - b1) * g;
    v[i] = b2 * v[i] + (1.0 - b2) * g * g;
    param[i] -= step_size * m[i] / (std::sqrt(v[i]) / bc2_sqrt + s.epsilon);
  }
}

}  // namespace

void adam_step(MlpNetwork& net, const ParameterSet& grads, AdamState& state, double lr) {
  if (!(lr > 0.0)) throw ConfigError("adam_step: learning rate must be positive");
  if (grads.weights.size() != net.layers.size() ||
      state.first_moment.weights.size() != net.layers.size())
    throw ShapeError("adam_step: gradient/state layout differs from network");
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (grads.weights[l].size() != net.layers[l].weight.size() ||
        grads.biases[l].size() != net.layers[l].bias.size())
      throw ShapeError("adam_step: gradient shape differs in layer " + std::to_string(l));
    check_finite(grads.weights[l].values(), l, "weight");
    check_finite(grads.biases[l], l, "bias");
  }

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2_sqrt = std::sqrt(1.0 - std::pow(state.beta2, t));
  const double step_size = lr / bc1;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    update(net.layers[l].weight.values(), grads.weights[l].values(),
           state.first_moment.weights[l].values(), state.second_moment.weights[l].values(), state,
           step_size, bc2_sqrt);
    update(net.layers[l].bias, grads.biases[l], state.first_moment.biases[l],
           state.second_moment.biases[l], state, step_size, bc2_sqrt);
  }
}

void LrSchedule::validate() const {
  if (!(initial_lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(decay_factor > 0.0 && decay_factor < 1.0))
    throw ConfigError("decay factor must lie in (0, 1)");
  if (!(decay_start_fraction >= 0.0 && decay_start_fraction <= 1.0))
    throw ConfigError("decay start fraction must lie in [0, 1]");
  if (!(decay_interval_fraction > 0.0)) throw ConfigError("decay interval must be positive");
}

std::vector<std::size_t> LrSchedule::decay_epochs() const {
  std::vector<std::size_t> epochs;
  const auto total = static_cast<double>(total_epochs);
  const auto start = static_cast<std::size_t>(std::floor(total * decay_start_fraction));
  const auto interval =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(total * decay_interval_fraction)));
  for (std::size_t e = start; e < total_epochs; e += interval) epochs.push_back(e);
  return epochs;
}

double lr_at_epoch(const LrSchedule& schedule, std::size_t epoch) {
  schedule.validate();
  if (epoch >= schedule.total_epochs)
    throw ConfigError("lr_at_epoch: epoch " + std::to_string(epoch) + " outside [0, " +
                      std::to_string(schedule.total_epochs) + ")");
  double lr = schedule.initial_lr;
  for (std::size_t e : schedule.decay_epochs()) {
    if (e > epoch) break;
    lr *= schedule.decay_factor;
  }
  return lr;
}

}  // namespace loopsurro
