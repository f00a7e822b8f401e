#include "loopsurro/multimodel.hpp"

#include <filesystem>

#include "loopsurro/errors.hpp"
#include "loopsurro/textio.hpp"

namespace loopsurro {

std::string to_string(SelectorKind k) {
  switch (k) {
    case SelectorKind::Single: return "single";
    case SelectorKind::ByCentroid: return "centroid";
    case SelectorKind::ByBranch: return "branch";
  }
  return "?";
}

SelectorKind selector_from_string(const std::string& s) {
  if (s == "single") return SelectorKind::Single;
  if (s == "centroid") return SelectorKind::ByCentroid;
  if (s == "branch") return SelectorKind::ByBranch;
  throw ConsistencyError("unknown selector '" + s + "'");
}

void SurrogateBundle::validate() const {
  if (networks.empty()) throw ConfigError("bundle has no networks");
  for (const auto& net : networks) {
    net.validate();
    if (net.output_dim() != n_out)
      throw ShapeError("bundle network output " + std::to_string(net.output_dim()) +
                       " differs from n_out " + std::to_string(n_out));
    if (net.input_dim() != networks.front().input_dim())
      throw ShapeError("bundle networks disagree on input size");
  }
  switch (selector) {
    case SelectorKind::Single:
      if (networks.size() != 1) throw ConfigError("single selector needs exactly one network");
      break;
    case SelectorKind::ByCentroid:
      if (centroids.cols() != networks.size() || centroids.rows() != n_out)
        throw ConfigError("centroid selector needs one n_out centroid per network");
      break;
    case SelectorKind::ByBranch:
      if (branch_ids.size() != networks.size())
        throw ConfigError("branch selector needs one branch id per network");
      break;
  }
}

void SurrogateBundle::check_compatible(const ResidualSystem& system) const {
  validate();
  if (n_in != system.n_in || n_out != system.n_out ||
      networks.front().input_dim() != system.feature_dim())
    throw ConfigError("bundle for '" + problem + "' does not fit system '" + system.name + "'");
  if (selector == SelectorKind::ByBranch && !system.branch_of)
    throw ConfigError("branch selector used with non-piecewise system " + system.name);
}

SurrogateBundle single_bundle(const ResidualSystem& system, MlpNetwork net) {
  SurrogateBundle b;
  b.networks.push_back(std::move(net));
  b.selector = SelectorKind::Single;
  b.problem = system.name;
  b.n_in = system.n_in;
  b.n_out = system.n_out;
  b.validate();
  return b;
}

std::size_t select_by_centroid(const SurrogateBundle& bundle,
                               std::span<const double> previous_output) {
  if (bundle.selector != SelectorKind::ByCentroid)
    throw SelectionError("bundle does not select by centroid");
  if (previous_output.size() != bundle.centroids.rows())
    throw ShapeError("previous output has the wrong dimension");
  return nearest_centroid(bundle.centroids, previous_output);
}

std::size_t select_by_branch(const SurrogateBundle& bundle, const ResidualSystem& system,
                             std::span<const double> x) {
  if (!system.branch_of) throw SelectionError("system " + system.name + " has no branches");
  const int id = system.branch_of(x);
  for (std::size_t i = 0; i < bundle.branch_ids.size(); ++i)
    if (bundle.branch_ids[i] == id) return i;
  throw SelectionError("no network trained for branch " + std::to_string(id));
}

void save_bundle(const SurrogateBundle& bundle, const std::string& dir,
                 const std::string& manifest_hash) {
  bundle.validate();
  std::filesystem::create_directories(dir);
  KeyValues kv;
  if (!manifest_hash.empty()) kv.set("manifest", manifest_hash);
  kv.set("problem", bundle.problem);
  kv.set("selector", to_string(bundle.selector));
  kv.set_int("n_in", static_cast<long long>(bundle.n_in));
  kv.set_int("n_out", static_cast<long long>(bundle.n_out));
  kv.set_int("networks", static_cast<long long>(bundle.networks.size()));
  for (std::size_t i = 0; i < bundle.networks.size(); ++i) {
    const std::string file = "net_" + std::to_string(i) + ".mlp";
    save_network_file(bundle.networks[i], dir + "/" + file);
    kv.set("network." + std::to_string(i), file);
    if (bundle.selector == SelectorKind::ByBranch)
      kv.set_int("branch." + std::to_string(i), bundle.branch_ids[i]);
  }
  if (bundle.selector == SelectorKind::ByCentroid) {
    kv.set("centroids", "centroids.csv");
    CsvTable t;
    if (!manifest_hash.empty()) t.comments.push_back("manifest " + manifest_hash);
    for (std::size_t i = 0; i < bundle.n_out; ++i) t.header.push_back("y" + std::to_string(i));
    for (std::size_t c = 0; c < bundle.centroids.cols(); ++c) {
      std::vector<std::string> row;
      for (double v : bundle.centroids.col(c)) row.push_back(format_double(v));
      t.rows.push_back(std::move(row));
    }
    write_csv(dir + "/centroids.csv", t);
  }
  kv.save(dir + "/manifest.kv");
}

SurrogateBundle load_bundle(const std::string& dir) {
  const KeyValues kv = KeyValues::load(dir + "/manifest.kv");
  SurrogateBundle b;
  b.problem = kv.get("problem");
  b.selector = selector_from_string(kv.get("selector"));
  b.n_in = static_cast<std::size_t>(kv.get_int("n_in"));
  b.n_out = static_cast<std::size_t>(kv.get_int("n_out"));
  const auto count = static_cast<std::size_t>(kv.get_int("networks"));
  for (std::size_t i = 0; i < count; ++i) {
    b.networks.push_back(load_network_file(dir + "/" + kv.get("network." + std::to_string(i))));
    if (b.selector == SelectorKind::ByBranch)
      b.branch_ids.push_back(static_cast<int>(kv.get_int("branch." + std::to_string(i))));
  }
  if (b.selector == SelectorKind::ByCentroid) {
    const CsvTable t = read_csv(dir + "/" + kv.get("centroids"));
    b.centroids = Matrix(b.n_out, t.rows.size());
    for (std::size_t c = 0; c < t.rows.size(); ++c)
      for (std::size_t i = 0; i < b.n_out; ++i) b.centroids(i, c) = parse_double(t.rows[c][i]);
  }
  b.validate();
  return b;
}

MultiTrainResult train_per_cluster(const ResidualSystem& system, const Dataset& labeled,
                                   std::size_t k, const TrainConfig& config) {
  MultiTrainResult result;
  result.guidance = labels_to_clusters_targets(labeled, k, config.seed);
  for (std::size_t c = 0; c < k; ++c)
    if (result.guidance.members[c].size() < config.batch_size)
      throw ConfigError("cluster " + std::to_string(c) + " has " +
                        std::to_string(result.guidance.members[c].size()) +
                        " samples, fewer than batch_size " + std::to_string(config.batch_size) +
                        "; try a smaller k");

  SurrogateBundle& bundle = result.bundle;
  bundle.selector = SelectorKind::ByCentroid;
  bundle.centroids = result.guidance.clusters.centroids;
  bundle.problem = system.name;
  bundle.n_in = system.n_in;
  bundle.n_out = system.n_out;
  for (std::size_t c = 0; c < k; ++c) {
    const auto& idx = result.guidance.members[c];
    Dataset part;
    part.inputs = labeled.inputs.select_cols(idx);
    part.labels = labeled.labels->select_cols(idx);
    part.method = labeled.method;
    part.bounds = labeled.bounds;
    TrainConfig cfg = config;
    cfg.seed = config.seed + c;
    MlpNetwork net = make_surrogate_network(system, cfg.hidden, cfg.seed);
    result.reports.push_back(two_phase_train(system, *part.labels, part, nullptr, net, cfg));
    bundle.networks.push_back(std::move(net));
  }
  bundle.validate();
  return result;
}

MultiTrainResult train_per_branch(const ResidualSystem& system,
                                  const std::vector<Dataset>& datasets,
                                  const std::vector<Matrix>& guidance, const TrainConfig& config) {
  if (system.branches.empty())
    throw ConfigError("system " + system.name + " has no branches");
  if (datasets.size() != system.branches.size() || guidance.size() != datasets.size())
    throw ConfigError("need one dataset and one guidance entry per branch");
  MultiTrainResult result;
  SurrogateBundle& bundle = result.bundle;
  bundle.selector = SelectorKind::ByBranch;
  bundle.problem = system.name;
  bundle.n_in = system.n_in;
  bundle.n_out = system.n_out;
  for (std::size_t b = 0; b < datasets.size(); ++b) {
    const ResidualSystem& branch = system.branch(static_cast<int>(b));
    TrainConfig cfg = config;
    cfg.seed = config.seed + b;
    MlpNetwork net = make_surrogate_network(system, cfg.hidden, cfg.seed);
    if (!guidance[b].empty()) {
      result.reports.push_back(
          two_phase_train(branch, guidance[b], datasets[b], nullptr, net, cfg));
    } else {
      cfg.mode = LossMode::Residual;
      result.reports.push_back(train(branch, datasets[b], nullptr, net, cfg));
    }
    bundle.networks.push_back(std::move(net));
    bundle.branch_ids.push_back(static_cast<int>(b));
  }
  bundle.validate();
  return result;
}

}  // namespace loopsurro
