#include "csiloc/zoo.hpp"

#include "csiloc/error.hpp"

namespace csiloc::zoo {
namespace {

using namespace csiloc::nn;

std::vector<LayerSpec> conv_stack() {
  return {
      ConvSpec{32, 4, 4, 1, 4}, LeakyReluSpec{}, DropoutSpec{},
      ConvSpec{64, 4, 4, 1, 2}, LeakyReluSpec{}, DropoutSpec{},
      ConvSpec{128, 3, 3, 1, 1}, LeakyReluSpec{}, DropoutSpec{},
      FlattenSpec{},
  };
}

void add_dense(std::vector<LayerSpec>& layers, std::size_t units) {
  layers.emplace_back(FullyConnectedSpec{units});
  layers.emplace_back(LeakyReluSpec{});
}

}  // namespace

NetworkSpec build_regression_net() {
  NetworkSpec spec;
  spec.task = Task::Regression;
  spec.layers = conv_stack();
  for (std::size_t units : {256, 128, 35, 16, 8}) add_dense(spec.layers, units);
  spec.layers.emplace_back(FullyConnectedSpec{2});
  return spec;
}

NetworkSpec build_classification_net() {
  NetworkSpec spec;
  spec.task = Task::Classification;
  spec.layers = conv_stack();
  add_dense(spec.layers, 256);
  add_dense(spec.layers, 64);
  spec.layers.emplace_back(FullyConnectedSpec{63});
  spec.layers.emplace_back(SoftmaxSpec{});
  return spec;
}

std::vector<env::Position> predict_position(Network& network, const Tensor& batch) {
  if (network.spec().task != Task::Regression) throw PreconditionError("predict_position needs a regression network");
  const Tensor out = network.forward(batch);
  std::vector<env::Position> positions(out.dim(0));
  for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = {out[2 * i], out[2 * i + 1]};
  return positions;
}

std::vector<env::GridLabel> predict_class(Network& network, const Tensor& batch) {
  if (network.spec().task != Task::Classification)
    throw PreconditionError("predict_class needs a classification network");
  std::vector<env::GridLabel> labels;
  for (std::size_t c : argmax_rows(network.forward(batch))) labels.emplace_back(static_cast<int>(c) + 1);
  return labels;
}

}  // namespace csiloc::zoo
