#include "loopsurro/mlp.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "loopsurro/errors.hpp"
#include "loopsurro/kernels.hpp"
#include "loopsurro/rng.hpp"

namespace loopsurro {

namespace {
constexpr const char* kHeader = "loopsurro-mlp v1";
}

std::string to_string(Activation a) { return a == Activation::ReLU ? "relu" : "identity"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "identity") return Activation::Identity;
  throw ConfigError("unknown activation '" + s + "'");
}

std::size_t MlpNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

void MlpNetwork::validate() const {
  if (layers.empty()) throw ShapeError("network has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.bias.size() != layer.weight.rows())
      throw ShapeError("layer " + std::to_string(l) + ": bias length differs from weight rows");
    if (l > 0 && layers[l - 1].weight.rows() != layer.weight.cols())
      throw ShapeError("layer " + std::to_string(l) + ": input width does not chain");
  }
  if (layers.back().activation != Activation::Identity)
    throw ShapeError("output layer must use the identity activation");
}

MlpNetwork init_network(std::span<const std::size_t> layer_sizes, Activation hidden,
                        std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw ConfigError("init_network: need at least two layer sizes");
  for (std::size_t s : layer_sizes)
    if (s == 0) throw ConfigError("init_network: layer sizes must be positive");

  MlpNetwork net;
  net.seed = seed;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const std::size_t fan_in = layer_sizes[l], fan_out = layer_sizes[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    DenseLayer layer;
    layer.weight = Matrix(fan_out, fan_in);
    for (double& w : layer.weight.values()) w = rng.uniform(-bound, bound);
    layer.bias.assign(fan_out, 0.0);
    layer.activation = (l + 2 == layer_sizes.size()) ? Activation::Identity : hidden;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

Matrix forward(const MlpNetwork& net, const Matrix& x, ForwardCache* cache) {
  if (x.rows() != net.input_dim())
    throw ShapeError("forward: input has " + std::to_string(x.rows()) + " rows, network expects " +
                     std::to_string(net.input_dim()));
  if (cache) {
    cache->input = x;
    cache->pre_activations.resize(net.layers.size());
    cache->activations.resize(net.layers.size());
  }
  Matrix a = x;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    Matrix z;
    kernels::affine(layer.weight, layer.bias, a, z);
    if (cache) cache->pre_activations[l] = z;
    if (layer.activation == Activation::ReLU) kernels::relu_inplace(z);
    a = std::move(z);
    if (cache) cache->activations[l] = a;
  }
  return a;
}

ParameterSet ParameterSet::zeros_like(const MlpNetwork& net) {
  ParameterSet p;
  for (const auto& l : net.layers) {
    p.weights.emplace_back(l.weight.rows(), l.weight.cols());
    p.biases.emplace_back(l.bias.size(), 0.0);
  }
  return p;
}

ParameterSet backward_with_output_gradient(const MlpNetwork& net, const ForwardCache& cache,
                                           const Matrix& out_grad) {
  const std::size_t L = net.layers.size();
  if (cache.activations.size() != L || cache.pre_activations.size() != L)
    throw ShapeError("backward: forward cache does not match the network");
  const Matrix& out = cache.activations.back();
  if (out_grad.rows() != out.rows() || out_grad.cols() != out.cols())
    throw ShapeError("backward: output gradient shape differs from network output");

  ParameterSet grads = ParameterSet::zeros_like(net);
  Matrix delta = out_grad;
  for (std::size_t l = L; l-- > 0;) {
    const auto& layer = net.layers[l];
    if (layer.activation == Activation::ReLU) kernels::relu_mask(cache.pre_activations[l], delta);
    const Matrix& below = l == 0 ? cache.input : cache.activations[l - 1];
    kernels::weight_grad(delta, below, grads.weights[l], grads.biases[l]);
    if (l > 0) {
      Matrix next;
      kernels::input_grad(layer.weight, delta, next);
      delta = std::move(next);
    }
  }
  return grads;
}

void save_network(const MlpNetwork& net, std::ostream& out) {
  net.validate();
  out << kHeader << '\n';
  out << "seed " << net.seed << '\n';
  out << "layers " << net.layers.size() << '\n';
  out << std::setprecision(17);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    out << "layer " << l << " out " << layer.weight.rows() << " in " << layer.weight.cols()
        << " activation " << to_string(layer.activation) << '\n';
    for (std::size_t r = 0; r < layer.weight.rows(); ++r) {
      for (std::size_t c = 0; c < layer.weight.cols(); ++c)
        out << (c ? " " : "") << layer.weight(r, c);
      out << '\n';
    }
    for (std::size_t r = 0; r < layer.bias.size(); ++r) out << (r ? " " : "") << layer.bias[r];
    out << '\n';
  }
}

MlpNetwork load_network(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader)
    throw ConsistencyError("network file: missing 'loopsurro-mlp v1' header");
  auto expect = [&](const std::string& word) {
    std::string w;
    if (!(in >> w) || w != word) throw ConsistencyError("network file: expected '" + word + "'");
  };
  MlpNetwork net;
  std::size_t count = 0;
  expect("seed");
  in >> net.seed;
  expect("layers");
  in >> count;
  for (std::size_t l = 0; l < count; ++l) {
    std::size_t index = 0, rows = 0, cols = 0;
    std::string act;
    expect("layer");
    in >> index;
    expect("out");
    in >> rows;
    expect("in");
    in >> cols;
    expect("activation");
    in >> act;
    if (!in || index != l) throw ConsistencyError("network file: bad layer header");
    DenseLayer layer;
    layer.activation = activation_from_string(act);
    layer.weight = Matrix(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) in >> layer.weight(r, c);
    layer.bias.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) in >> layer.bias[r];
    if (!in) throw ConsistencyError("network file: truncated layer " + std::to_string(l));
    net.layers.push_back(std::move(layer));
  }
  net.validate();
  return net;
}

void save_network_file(const MlpNetwork& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConsistencyError("cannot write " + path);
  save_network(net, out);
}

MlpNetwork load_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConsistencyError("cannot read " + path);
  return load_network(in);
}

}  // namespace loopsurro
