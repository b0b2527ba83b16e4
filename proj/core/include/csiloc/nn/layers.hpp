#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "csiloc/nn/ops.hpp"
#include "csiloc/nn/tensor.hpp"
#include "csiloc/random.hpp"

namespace csiloc::nn {

struct ConvSpec {
  std::size_t filters = 1;
  std::size_t filter_h = 1;
  std::size_t filter_w = 1;
  std::size_t stride_h = 1;
  std::size_t stride_w = 1;
};

struct FullyConnectedSpec {
  std::size_t units = 1;
};

struct LeakyReluSpec {
  double gamma = 0.01;
};

struct SoftmaxSpec {};

struct DropoutSpec {
  double p = 0.4;
};

struct FlattenSpec {};

using LayerSpec = std::variant<ConvSpec, FullyConnectedSpec, LeakyReluSpec, SoftmaxSpec, DropoutSpec, FlattenSpec>;

std::string describe(const LayerSpec& spec);

/// Per-sample output shape (no batch axis). Throws ShapeError.
Shape output_shape(const LayerSpec& spec, const Shape& input);

/// Learnable element count (weights + biases) for the given per-sample input.
std::size_t param_count(const LayerSpec& spec, const Shape& input);

/// A learnable tensor together with its gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

/// A layer in a sequential network. Tensors carry a leading batch axis.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerSpec spec() const = 0;
  virtual Tensor forward(const Tensor& input, Mode mode, Rng& rng) = 0;
  /// Uses the state cached by the last forward call. Parameter gradients are
  /// overwritten, not accumulated.
  virtual Tensor backward(const Tensor& grad_output, bool want_input_grad) = 0;
  virtual std::vector<Parameter*> parameters() { return {}; }
};

class ConvLayer final : public Layer {
 public:
  ConvLayer(const ConvSpec& spec, std::size_t in_channels);

  LayerSpec spec() const override { return spec_; }
  Tensor forward(const Tensor& input, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_output, bool want_input_grad) override;
  std::vector<Parameter*> parameters() override { return {&weights_, &bias_}; }

  Parameter& weights() { return weights_; }
  Parameter& bias() { return bias_; }

 private:
  ConvSpec spec_;
  Parameter weights_;  // fh x fw x C x F
  Parameter bias_;     // F
  Tensor input_;
};

class DenseLayer final : public Layer {
 public:
  DenseLayer(const FullyConnectedSpec& spec, std::size_t in_features);

  LayerSpec spec() const override { return spec_; }
  Tensor forward(const Tensor& input, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_output, bool want_input_grad) override;
  std::vector<Parameter*> parameters() override { return {&weights_, &bias_}; }

  Parameter& weights() { return weights_; }
  Parameter& bias() { return bias_; }

 private:
  FullyConnectedSpec spec_;
  Parameter weights_;  // units x in_features
  Parameter bias_;
  Tensor input_;
};

class LeakyReluLayer final : public Layer {
 public:
  explicit LeakyReluLayer(const LeakyReluSpec& spec) : spec_(spec) {}

  LayerSpec spec() const override { return spec_; }
  Tensor forward(const Tensor& input, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_output, bool want_input_grad) override;

  /// Pre-activation of the last forward pass.
  const Tensor& last_input() const noexcept { return input_; }

 private:
  LeakyReluSpec spec_;
  Tensor input_;
};

class SoftmaxLayer final : public Layer {
 public:
  LayerSpec spec() const override { return SoftmaxSpec{}; }
  Tensor forward(const Tensor& input, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_output, bool want_input_grad) override;

 private:
  Tensor output_;
};

class DropoutLayer final : public Layer {
 public:
  explicit DropoutLayer(const DropoutSpec& spec) : spec_(spec) {}

  LayerSpec spec() const override { return spec_; }
  Tensor forward(const Tensor& input, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_output, bool want_input_grad) override;

 private:
  DropoutSpec spec_;
  Tensor mask_;
};

class FlattenLayer final : public Layer {
 public:
  LayerSpec spec() const override { return FlattenSpec{}; }
  Tensor forward(const Tensor& input, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_output, bool want_input_grad) override;

 private:
  Shape input_shape_;
};

/// Instantiates a layer for the given per-sample input shape with zero
/// parameters.
std::unique_ptr<Layer> make_layer(const LayerSpec& spec, const Shape& input);

/// He-style fan-in uniform init, U(-sqrt(6 / fan_in), +sqrt(6 / fan_in)), zero
/// biases.
void initialize(Layer& layer, Rng& rng);

}  // namespace csiloc::nn
