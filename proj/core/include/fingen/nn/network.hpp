#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fingen/nn/tensor.hpp"

namespace fingen::nn {

enum class LayerKind { dense, conv, relu, flatten, maxpool };

struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  int units = 0;   // dense width or conv output channels
  int kernel = 0;  // conv kernel side / pool window
  int stride = 1;  // conv stride / pool stride

  static LayerSpec dense(int units) { return {LayerKind::dense, units, 0, 1}; }
  static LayerSpec conv(int channels, int kernel, int stride = 1) { return {LayerKind::conv, channels, kernel, stride}; }
  static LayerSpec relu() { return {LayerKind::relu, 0, 0, 1}; }
  static LayerSpec flatten() { return {LayerKind::flatten, 0, 0, 1}; }
  static LayerSpec maxpool(int window = 2) { return {LayerKind::maxpool, 0, window, window}; }
};

// Per-sample input shape ({features} or {channels, height, width}) plus layers.
struct NetworkSpec {
  std::vector<int> input_shape;
  std::vector<LayerSpec> layers;

  // Per-sample shape after every layer; throws ShapeError when incompatible.
  std::vector<std::vector<int>> shapes() const;
  std::vector<int> output_shape() const { return shapes().back(); }

  // Multilayer perceptron: dense-relu blocks and a linear output layer.
  static NetworkSpec mlp(int inputs, const std::vector<int>& hidden, int outputs);
};

nlohmann::json to_json(const NetworkSpec& spec);
NetworkSpec network_spec_from_json(const nlohmann::json& doc);  // throws ParseError

// Activations kept by forward() for a later backward().
struct ForwardRecord {
  std::vector<Tensor> inputs;                // input of each layer
  std::vector<std::vector<int>> pool_index;  // argmax per maxpool layer (empty otherwise)
  bool valid = false;
};

// Stateless evaluator over a flat parameter vector. All const methods are
// safe to call concurrently.
class Network {
 public:
  explicit Network(NetworkSpec spec);

  const NetworkSpec& spec() const { return spec_; }
  std::size_t parameter_count() const { return total_; }
  // Offset and length of layer k's parameters (weights then bias).
  std::size_t offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t weight_count(std::size_t layer) const { return weights_[layer]; }
  std::size_t bias_count(std::size_t layer) const { return biases_[layer]; }

  // Uniform(+-sqrt(6 / fan_in)) weights, zero biases. The last parametrized
  // layer's weights are multiplied by `output_scale`.
  std::vector<double> initial_parameters(std::mt19937_64& rng, double output_scale = 1.0) const;

  // Batched input of shape {B, input_shape...}. Throws ShapeError.
  Tensor forward(std::span<const double> params, const Tensor& input, ForwardRecord* record = nullptr) const;

  // Accumulates dLoss/dparams into `grads` and returns dLoss/dinput. Throws
  // StateError when the record holds no forward pass.
  Tensor backward(std::span<const double> params, const ForwardRecord& record, const Tensor& upstream,
                  std::span<double> grads) const;

 private:
  NetworkSpec spec_;
  std::vector<std::vector<int>> shapes_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> weights_;
  std::vector<std::size_t> biases_;
  std::size_t total_ = 0;
};

}  // namespace fingen::nn
