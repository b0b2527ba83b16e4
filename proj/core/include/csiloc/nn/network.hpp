#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "csiloc/nn/layers.hpp"
#include "csiloc/nn/tensor.hpp"
#include "csiloc/random.hpp"

namespace csiloc::nn {

enum class Task : std::uint8_t { Regression = 0, Classification = 1 };

const char* to_string(Task task);

struct NetworkSpec {
  Task task = Task::Regression;
  Shape input_shape{9, 56, 1};
  std::vector<LayerSpec> layers;

  /// Input shape followed by every layer's per-sample output shape.
  /// Throws ShapeError when the chain is illegal.
  std::vector<Shape> shape_chain() const;

  /// Shape chain plus task constraints: regression ends in a 2-vector,
  /// classification ends in a softmax.
  void validate() const;

  std::size_t output_size() const;
};

std::size_t param_count(const NetworkSpec& spec);

enum class GradientSource {
  Output,  // gradient with respect to the network output
  Logits,  // gradient with respect to the input of a terminal softmax
};

/// Sequential network instantiated from a spec. Move-only.
class Network {
 public:
  /// Parameters drawn with the fan-in uniform initializer from `init_seed`.
  explicit Network(NetworkSpec spec, std::uint64_t init_seed = 0);

  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  const NetworkSpec& spec() const noexcept { return spec_; }
  std::size_t layer_count() const noexcept { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }

  /// batch: N x input_shape. `rng` drives dropout masks in Train mode.
  Tensor forward(const Tensor& batch, Mode mode, Rng& rng);
  /// Eval-mode forward.
  Tensor forward(const Tensor& batch);

  /// Backpropagates through the cached forward pass and overwrites every
  /// parameter gradient.
  void backward(const Tensor& grad, GradientSource source = GradientSource::Output);

  std::vector<Parameter*> parameters();
  std::vector<Shape> parameter_shapes() const;
  std::size_t param_count() const;

  bool has_dropout() const;

 private:
  NetworkSpec spec_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// Index of the largest entry of each row; the lowest index wins ties.
std::vector<std::size_t> argmax_rows(const Tensor& scores);

}  // namespace csiloc::nn
