#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "loopsurro/mlp.hpp"

namespace loopsurro {

struct AdamState {
  ParameterSet first_moment;
  ParameterSet second_moment;
  std::uint64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_network(const MlpNetwork& net);
};

// One bias-corrected Adam update in place. Throws DivergedError naming the
// parameter block if any gradient entry is non-finite (nothing is modified).
void adam_step(MlpNetwork& net, const ParameterSet& grads, AdamState& state, double lr);

// Piecewise-constant learning rate: initial_lr until
// floor(total * decay_start_fraction), then multiplied by decay_factor every
// round(total * decay_interval_fraction) epochs. For 2000 epochs the decays
// land on 1000, 1400 and 1800.
struct LrSchedule {
  double initial_lr = 8e-4;
  std::size_t total_epochs = 2000;
  double decay_factor = 0.2;
  double decay_start_fraction = 0.5;
  double decay_interval_fraction = 0.2;

  void validate() const;
  std::vector<std::size_t> decay_epochs() const;
};

double lr_at_epoch(const LrSchedule& schedule, std::size_t epoch);

}  // namespace loopsurro
