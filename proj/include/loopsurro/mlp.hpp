#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "loopsurro/matrix.hpp"

namespace loopsurro {

enum class Activation { ReLU, Identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct DenseLayer {
  Matrix weight;  // out x in
  std::vector<double> bias;
  Activation activation = Activation::Identity;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Feedforward network. Hidden layers use the activation given at
// construction; the output layer is always Identity.
struct MlpNetwork {
  std::vector<DenseLayer> layers;
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().weight.cols(); }
  std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().weight.rows(); }
  std::size_t parameter_count() const;

  // Throws ShapeError if adjacent layers do not chain or the last layer is not Identity.
  void validate() const;

  friend bool operator==(const MlpNetwork&, const MlpNetwork&) = default;
};

// Weights ~ U(-a, a) with a = sqrt(6 / (fan_in + fan_out)); biases zero.
// Throws ConfigError for fewer than two sizes or a zero size.
MlpNetwork init_network(std::span<const std::size_t> layer_sizes, Activation hidden,
                        std::uint64_t seed);

// Per-layer values kept by forward() for the backward pass.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre_activations;  // z_l = W_l a_{l-1} + b_l
  std::vector<Matrix> activations;      // a_l = act(z_l)
};

Matrix forward(const MlpNetwork& net, const Matrix& x, ForwardCache* cache = nullptr);

// Same layout as the network parameters. Also used for Adam moments.
struct ParameterSet {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  static ParameterSet zeros_like(const MlpNetwork& net);
  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;
};

// Backpropagates an externally computed dL/d(output). The caller is
// responsible for any 1/n batch scaling; here columns are simply summed.
ParameterSet backward_with_output_gradient(const MlpNetwork& net, const ForwardCache& cache,
                                           const Matrix& out_grad);

// Text format: header line "loopsurro-mlp v1", then one block per layer with
// row-major weights printed to 17 significant digits.
void save_network(const MlpNetwork& net, std::ostream& out);
MlpNetwork load_network(std::istream& in);
void save_network_file(const MlpNetwork& net, const std::string& path);
MlpNetwork load_network_file(const std::string& path);

}  // namespace loopsurro
