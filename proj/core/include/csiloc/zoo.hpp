#pragma once

// The two localization architectures. Both share a three-layer conv stack on
// the 9 x 56 x 1 fingerprint; the heads differ.

#include <cstddef>
#include <vector>

#include "csiloc/environment.hpp"
#include "csiloc/nn/network.hpp"

namespace csiloc::zoo {

/// Conv stack, flatten, FCL 256-128-35-16-8 with leaky ReLU, linear FCL 2.
nn::NetworkSpec build_regression_net();

/// Conv stack, flatten, FCL 256-64 with leaky ReLU, FCL 63, softmax.
nn::NetworkSpec build_classification_net();

inline std::size_t param_count(const nn::NetworkSpec& spec) { return nn::param_count(spec); }

/// One (x, y) row per sample.
std::vector<env::Position> predict_position(nn::Network& network, const nn::Tensor& batch);

/// Argmax class per sample as a grid label; the lowest index wins ties.
std::vector<env::GridLabel> predict_class(nn::Network& network, const nn::Tensor& batch);

}  // namespace csiloc::zoo
