#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "chal/tensor.hpp"

namespace chal {

struct DenseSpec {
  std::size_t in_features = 0;
  std::size_t out_features = 0;
};

// Valid padding. Weight layout [out_channels, in_channels, kernel_h, kernel_w].
struct Conv2DSpec {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  std::size_t stride = 1;
};

struct ReluSpec {};

// 2x2 window, stride 2; odd trailing rows/columns are dropped.
struct MaxPool2Spec {};

struct FlattenSpec {};

using LayerSpec =
    std::variant<DenseSpec, Conv2DSpec, ReluSpec, MaxPool2Spec, FlattenSpec>;

std::string layer_name(const LayerSpec& spec);
bool layer_has_params(const LayerSpec& spec);

// Sample shape (no batch axis) produced by a layer, or a throw describing
// the incompatibility.
std::vector<std::size_t> layer_output_shape(
    const LayerSpec& spec, const std::vector<std::size_t>& input_shape);

// Weight and bias for one layer; both empty for layers without parameters.
struct LayerParams {
  Tensor weight;
  Tensor bias;
};

// Feed-forward classifier: an ordered layer list with parameters and a fixed
// per-sample input shape. The final layer must be Dense; its output width is
// the class count.
class Network {
 public:
  Network(std::vector<LayerSpec> specs, std::vector<std::size_t> input_shape,
          std::vector<LayerParams> params);

  std::size_t layer_count() const noexcept { return specs_.size(); }
  const std::vector<LayerSpec>& specs() const noexcept { return specs_; }
  const LayerSpec& spec(std::size_t i) const { return specs_.at(i); }
  const LayerParams& params(std::size_t i) const { return params_.at(i); }
  LayerParams& params(std::size_t i) { return params_.at(i); }
  const std::vector<std::size_t>& input_shape() const noexcept {
    return input_shape_;
  }
  std::size_t class_count() const noexcept { return class_count_; }

  // Sample shape entering layer i (layer_count() means the output shape).
  const std::vector<std::size_t>& shape_before(std::size_t i) const {
    return shapes_.at(i);
  }

  std::size_t parameter_count() const;

 private:
  std::vector<LayerSpec> specs_;
  std::vector<LayerParams> params_;
  std::vector<std::size_t> input_shape_;
  std::vector<std::vector<std::size_t>> shapes_;  // per layer boundary
  std::size_t class_count_ = 0;
};

// He-initialized network: weights ~ N(0, sqrt(2/fan_in)), biases zero,
// drawn layer by layer in row-major order from Rng(seed).
Network build_network(std::vector<LayerSpec> specs,
                      std::vector<std::size_t> input_shape,
                      std::uint64_t seed);

struct LayerTrace {
  Tensor input;   // batch activation entering the layer
  Tensor output;  // batch activation leaving the layer
};

struct ForwardTrace {
  std::vector<LayerTrace> layers;
  Tensor logits;
};

Tensor forward(const Network& net, const Tensor& x);
ForwardTrace forward_traced(const Network& net, const Tensor& x);

struct Gradients {
  std::vector<LayerParams> params;  // shaped like the network parameters
  Tensor input;                     // gradient w.r.t. the batch input
  double loss = 0.0;                // mean softmax cross-entropy
};

// Exact gradients of the mean softmax cross-entropy over the traced batch.
Gradients backward(const Network& net, const ForwardTrace& trace,
                   const std::vector<std::size_t>& labels);

// Row-wise softmax of a [batch x C] logit tensor (max-shifted).
Tensor softmax_rows(const Tensor& logits);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class AdamState {
 public:
  AdamState(const Network& net, AdamConfig cfg);

  const AdamConfig& config() const noexcept { return cfg_; }
  std::size_t step() const noexcept { return step_; }

  friend void adam_step(Network& net, const Gradients& grads, AdamState& state);

 private:
  AdamConfig cfg_;
  std::vector<LayerParams> m_;
  std::vector<LayerParams> v_;
  std::size_t step_ = 0;
};

// One bias-corrected Adam update; mutates the network parameters and state.
void adam_step(Network& net, const Gradients& grads, AdamState& state);

// Architecture DSL: whitespace-separated layer tokens, input widths inferred
// from the running shape. Tokens: "dense:OUT", "conv:OC,KH,KW[,STRIDE]",
// "relu", "pool", "flatten".
std::vector<LayerSpec> parse_architecture(
    const std::string& text, const std::vector<std::size_t>& input_shape);

}  // namespace chal
