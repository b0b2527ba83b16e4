#include "csiloc/nn/network.hpp"

#include <string>
#include <variant>

#include "csiloc/error.hpp"

namespace csiloc::nn {

const char* to_string(Task task) { return task == Task::Regression ? "regression" : "classification"; }

std::vector<Shape> NetworkSpec::shape_chain() const {
  std::vector<Shape> chain{input_shape};
  for (std::size_t i = 0; i < layers.size(); ++i) {
    try {
      chain.push_back(output_shape(layers[i], chain.back()));
    } catch (const ShapeError& e) {
      throw ShapeError("layer " + std::to_string(i) + " (" + describe(layers[i]) + "): " + e.what());
    }
  }
  return chain;
}

void NetworkSpec::validate() const {
  if (layers.empty()) throw ShapeError("network has no layers");
  const std::vector<Shape> chain = shape_chain();
  const Shape& out = chain.back();
  if (task == Task::Regression && out != Shape{2})
    throw ShapeError("regression network must output a 2-vector, got " + nn::to_string(out));
  if (task == Task::Classification && !std::holds_alternative<SoftmaxSpec>(layers.back()))
    throw ShapeError("classification network must end in a softmax");
}

std::size_t NetworkSpec::output_size() const { return element_count(shape_chain().back()); }

std::size_t param_count(const NetworkSpec& spec) {
  const std::vector<Shape> chain = spec.shape_chain();
  std::size_t total = 0;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) total += param_count(spec.layers[i], chain[i]);
  return total;
}

Network::Network(NetworkSpec spec, std::uint64_t init_seed) : spec_(std::move(spec)) {
  spec_.validate();
  const std::vector<Shape> chain = spec_.shape_chain();
  Rng rng(derive_seed(init_seed, {0x1417}));
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    layers_.push_back(make_layer(spec_.layers[i], chain[i]));
    initialize(*layers_.back(), rng);
  }
}

Tensor Network::forward(const Tensor& batch, Mode mode, Rng& rng) {
  if (batch.rank() != spec_.input_shape.size() + 1 ||
      !std::equal(spec_.input_shape.begin(), spec_.input_shape.end(), batch.shape().begin() + 1))
    throw ShapeError("network expects N x " + nn::to_string(spec_.input_shape) + " input, got " +
                     nn::to_string(batch.shape()));
  if (batch.dim(0) == 0) throw ShapeError("empty batch");
  Tensor x = layers_.front()->forward(batch, mode, rng);
  for (std::size_t i = 1; i < layers_.size(); ++i) x = layers_[i]->forward(x, mode, rng);
  return x;
}

Tensor Network::forward(const Tensor& batch) {
  Rng unused(0);
  return forward(batch, Mode::Eval, unused);
}

void Network::backward(const Tensor& grad, GradientSource source) {
  std::size_t top = layers_.size();
  if (source == GradientSource::Logits) {
    if (!std::holds_alternative<SoftmaxSpec>(spec_.layers.back()))
      throw PreconditionError("logit gradients need a terminal softmax layer");
    --top;
  }
  Tensor g = grad;
  for (std::size_t i = top; i-- > 0;) g = layers_[i]->backward(g, i > 0);
}

std::vector<Parameter*> Network::parameters() {
  std::vector<Parameter*> out;
  for (auto& layer : layers_)
    for (Parameter* p : layer->parameters()) out.push_back(p);
  return out;
}

std::vector<Shape> Network::parameter_shapes() const {
  std::vector<Shape> out;
  for (const auto& layer : layers_)
    for (Parameter* p : layer->parameters()) out.push_back(p->value.shape());
  return out;
}

std::size_t Network::param_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_)
    for (Parameter* p : layer->parameters()) n += p->value.size();
  return n;
}

bool Network::has_dropout() const {
  for (const LayerSpec& s : spec_.layers)
    if (const auto* d = std::get_if<DropoutSpec>(&s); d && d->p > 0.0) return true;
  return false;
}

std::vector<std::size_t> argmax_rows(const Tensor& scores) {
  if (scores.rank() == 0 || scores.empty()) return {};
  const std::size_t cols = scores.shape().back();
  const std::size_t rows = scores.size() / cols;
  std::vector<std::size_t> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < cols; ++c)
      if (scores[r * cols + c] > scores[r * cols + best]) best = c;
    out[r] = best;
  }
  return out;
}

}  // namespace csiloc::nn
