#include "csiloc/nn/layers.hpp"

#include <cmath>
#include <sstream>

#include "csiloc/error.hpp"

namespace csiloc::nn {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void validate(const LayerSpec& spec) {
  std::visit(Overloaded{
                 [](const ConvSpec& c) {
                   if (!c.filters || !c.filter_h || !c.filter_w || !c.stride_h || !c.stride_w)
                     throw ShapeError("convolution sizes and strides must be positive");
                 },
                 [](const FullyConnectedSpec& f) {
                   if (!f.units) throw ShapeError("fully connected layer needs at least one unit");
                 },
                 [](const LeakyReluSpec& l) {
                   if (!(l.gamma >= 0.0)) throw DomainError("leaky ReLU gamma must be >= 0");
                 },
                 [](const DropoutSpec& d) {
                   if (!(d.p >= 0.0 && d.p < 1.0)) throw DomainError("dropout probability must lie in [0, 1)");
                 },
                 [](const auto&) {},
             },
             spec);
}

}  // namespace

std::string describe(const LayerSpec& spec) {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const ConvSpec& c) {
                   os << "Conv(" << c.filters << " filters " << c.filter_h << "x" << c.filter_w << ", stride ("
                      << c.stride_h << "," << c.stride_w << "))";
                 },
                 [&](const FullyConnectedSpec& f) { os << "FCL " << f.units; },
                 [&](const LeakyReluSpec& l) { os << "LeakyReLU(" << l.gamma << ")"; },
                 [&](const SoftmaxSpec&) { os << "Softmax"; },
                 [&](const DropoutSpec& d) { os << "Dropout(" << d.p << ")"; },
                 [&](const FlattenSpec&) { os << "Flatten"; },
             },
             spec);
  return os.str();
}

Shape output_shape(const LayerSpec& spec, const Shape& input) {
  validate(spec);
  return std::visit(
      Overloaded{
          [&](const ConvSpec& c) -> Shape {
            if (input.size() != 3) throw ShapeError("convolution expects an HxWxC input, got " + to_string(input));
            return {conv_output_size(input[0], c.filter_h, c.stride_h, "height"),
                    conv_output_size(input[1], c.filter_w, c.stride_w, "width"), c.filters};
          },
          [&](const FullyConnectedSpec& f) -> Shape {
            if (input.size() != 1) throw ShapeError("fully connected layer expects a vector input, got " + to_string(input));
            return {f.units};
          },
          [&](const FlattenSpec&) -> Shape { return {element_count(input)}; },
          [&](const SoftmaxSpec&) -> Shape {
            if (input.size() != 1) throw ShapeError("softmax expects a vector input, got " + to_string(input));
            return input;
          },
          [&](const auto&) -> Shape { return input; },
      },
      spec);
}

std::size_t param_count(const LayerSpec& spec, const Shape& input) {
  output_shape(spec, input);  // validates
  return std::visit(Overloaded{
                        [&](const ConvSpec& c) { return c.filter_h * c.filter_w * input[2] * c.filters + c.filters; },
                        [&](const FullyConnectedSpec& f) { return f.units * input[0] + f.units; },
                        [](const auto&) -> std::size_t { return 0; },
                    },
                    spec);
}

ConvLayer::ConvLayer(const ConvSpec& spec, std::size_t in_channels)
    : spec_(spec),
      weights_{"weights", Tensor({spec.filter_h, spec.filter_w, in_channels, spec.filters}),
               Tensor({spec.filter_h, spec.filter_w, in_channels, spec.filters})},
      bias_{"bias", Tensor({spec.filters}), Tensor({spec.filters})} {}

Tensor ConvLayer::forward(const Tensor& input, Mode, Rng&) {
  input_ = input;
  return conv2d(input, weights_.value, bias_.value, {spec_.stride_h, spec_.stride_w});
}

Tensor ConvLayer::backward(const Tensor& grad_output, bool want_input_grad) {
  Conv2dGradients g =
      conv2d_backward(input_, weights_.value, {spec_.stride_h, spec_.stride_w}, grad_output, want_input_grad);
  weights_.grad = std::move(g.weights);
  bias_.grad = std::move(g.bias);
  return std::move(g.input);
}

DenseLayer::DenseLayer(const FullyConnectedSpec& spec, std::size_t in_features)
    : spec_(spec),
      weights_{"weights", Tensor({spec.units, in_features}), Tensor({spec.units, in_features})},
      bias_{"bias", Tensor({spec.units}), Tensor({spec.units})} {}

Tensor DenseLayer::forward(const Tensor& input, Mode, Rng&) {
  input_ = input;
  return fully_connected(input, weights_.value, bias_.value);
}

Tensor DenseLayer::backward(const Tensor& grad_output, bool want_input_grad) {
  DenseGradients g = fully_connected_backward(input_, weights_.value, grad_output, want_input_grad);
  weights_.grad = std::move(g.weights);
  bias_.grad = std::move(g.bias);
  return std::move(g.input);
}

Tensor LeakyReluLayer::forward(const Tensor& input, Mode, Rng&) {
  input_ = input;
  return leaky_relu(input, spec_.gamma);
}

Tensor LeakyReluLayer::backward(const Tensor& grad_output, bool) {
  return leaky_relu_backward(input_, grad_output, spec_.gamma);
}

Tensor SoftmaxLayer::forward(const Tensor& input, Mode, Rng&) {
  output_ = softmax(input);
  return output_;
}

Tensor SoftmaxLayer::backward(const Tensor& grad_output, bool) { return softmax_backward(output_, grad_output); }

Tensor DropoutLayer::forward(const Tensor& input, Mode mode, Rng& rng) {
  DropoutResult r = dropout(input, spec_.p, mode, rng);
  mask_ = std::move(r.mask);
  return std::move(r.output);
}

Tensor DropoutLayer::backward(const Tensor& grad_output, bool) { return dropout_backward(grad_output, mask_); }

Tensor FlattenLayer::forward(const Tensor& input, Mode, Rng&) {
  input_shape_ = input.shape();
  const std::size_t batch = input.dim(0);
  return input.reshaped({batch, input.size() / batch});
}

Tensor FlattenLayer::backward(const Tensor& grad_output, bool) { return grad_output.reshaped(input_shape_); }

std::unique_ptr<Layer> make_layer(const LayerSpec& spec, const Shape& input) {
  output_shape(spec, input);  // validates
  return std::visit(Overloaded{
                        [&](const ConvSpec& c) -> std::unique_ptr<Layer> {
                          return std::make_unique<ConvLayer>(c, input[2]);
                        },
                        [&](const FullyConnectedSpec& f) -> std::unique_ptr<Layer> {
                          return std::make_unique<DenseLayer>(f, input[0]);
                        },
                        [](const LeakyReluSpec& l) -> std::unique_ptr<Layer> {
                          return std::make_unique<LeakyReluLayer>(l);
                        },
                        [](const SoftmaxSpec&) -> std::unique_ptr<Layer> { return std::make_unique<SoftmaxLayer>(); },
                        [](const DropoutSpec& d) -> std::unique_ptr<Layer> {
                          return std::make_unique<DropoutLayer>(d);
                        },
                        [](const FlattenSpec&) -> std::unique_ptr<Layer> { return std::make_unique<FlattenLayer>(); },
                    },
                    spec);
}

void initialize(Layer& layer, Rng& rng) {
  std::size_t fan_in = 0;
  Parameter* weights = nullptr;
  Parameter* bias = nullptr;
  if (auto* conv = dynamic_cast<ConvLayer*>(&layer)) {
    const Shape& s = conv->weights().value.shape();
    fan_in = s[0] * s[1] * s[2];
    weights = &conv->weights();
    bias = &conv->bias();
  } else if (auto* dense = dynamic_cast<DenseLayer*>(&layer)) {
    fan_in = dense->weights().value.dim(1);
    weights = &dense->weights();
    bias = &dense->bias();
  } else {
    return;
  }
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (double& w : weights->value.values()) w = limit * (2.0 * uniform01(rng) - 1.0);
  bias->value.fill(0.0);
}

}  // namespace csiloc::nn
