#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "loopsurro/matrix.hpp"
#include "loopsurro/mlp.hpp"
#include "loopsurro/problems.hpp"
#include "loopsurro/sampling.hpp"
#include "loopsurro/training.hpp"

namespace loopsurro {

enum class SelectorKind { Single, ByCentroid, ByBranch };
std::string to_string(SelectorKind k);
SelectorKind selector_from_string(const std::string& s);

// A set of networks plus the rule that picks one per simulation step.
struct SurrogateBundle {
  std::vector<MlpNetwork> networks;
  SelectorKind selector = SelectorKind::Single;
  Matrix centroids;             // ByCentroid: n_out x networks.size()
  std::vector<int> branch_ids;  // ByBranch: branch served by each network
  std::string problem;
  std::size_t n_in = 0;
  std::size_t n_out = 0;

  // ShapeError/ConfigError on inconsistent arity or dimensions.
  void validate() const;
  // Throws ConfigError if the bundle does not fit the system.
  void check_compatible(const ResidualSystem& system) const;
};

SurrogateBundle single_bundle(const ResidualSystem& system, MlpNetwork net);

// argmin of the Euclidean distance to the centroids; ties go to the lowest index.
std::size_t select_by_centroid(const SurrogateBundle& bundle,
                               std::span<const double> previous_output);
// SelectionError when no network serves branch_of(x).
std::size_t select_by_branch(const SurrogateBundle& bundle, const ResidualSystem& system,
                             std::span<const double> x);

// Directory layout: manifest.kv, net_<i>.mlp, centroids.csv (ByCentroid).
void save_bundle(const SurrogateBundle& bundle, const std::string& dir,
                 const std::string& manifest_hash = "");
SurrogateBundle load_bundle(const std::string& dir);

struct MultiTrainResult {
  SurrogateBundle bundle;
  std::vector<TrainReport> reports;
  GuidanceTargets guidance;  // per-cluster training only
};

// Clusters the labels, then trains one network per cluster on that cluster's
// samples: MSE towards its labels until switch_epoch, residual loss after.
// ConfigError when a cluster holds fewer than batch_size samples.
MultiTrainResult train_per_cluster(const ResidualSystem& system, const Dataset& labeled,
                                   std::size_t k, const TrainConfig& config);

// One network per branch of a piecewise system. datasets[b] and guidance[b]
// (may be empty for pure residual training) belong to branch b.
MultiTrainResult train_per_branch(const ResidualSystem& system,
                                  const std::vector<Dataset>& datasets,
                                  const std::vector<Matrix>& guidance, const TrainConfig& config);

}  // namespace loopsurro
