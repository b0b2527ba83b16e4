#pragma once

// Central finite-difference verification of backpropagated gradients.

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "csiloc/nn/network.hpp"
#include "csiloc/nn/ops.hpp"
#include "csiloc/nn/tensor.hpp"

namespace csiloc::nn {

struct MseObjective {
  Tensor truth;  // N x 2
};

struct CrossEntropyObjective {
  Tensor truth_onehot;  // N x classes
};

using Objective = std::variant<MseObjective, CrossEntropyObjective>;

/// Eval-mode loss of `input` under the objective.
double objective_value(Network& network, const Tensor& input, const Objective& objective);

struct GradCheckOptions {
  double epsilon = 1e-5;
  /// 0 probes every parameter; otherwise a seeded random subset of this size
  /// per layer (layers with fewer parameters are probed exhaustively).
  std::size_t max_probes_per_layer = 0;
  std::uint64_t seed = 0;
  /// Train mode is refused when the network has dropout: the loss would not
  /// be a deterministic function of the parameters.
  Mode mode = Mode::Eval;
  /// relative error = |analytic - numeric| / max(|analytic|, |numeric|, floor)
  double denominator_floor = 1e-6;
};

struct LayerCheck {
  std::size_t layer = 0;
  std::string description;
  std::size_t parameters = 0;
  std::size_t probed = 0;
  /// Probes discarded because +/- epsilon moved a leaky ReLU input across 0.
  std::size_t skipped_kinks = 0;
  double max_relative_error = 0.0;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t probed = 0;
  std::size_t skipped_kinks = 0;
  std::vector<LayerCheck> layers;  // learnable layers only
};

GradCheckReport grad_check(Network& network, const Tensor& input, const Objective& objective,
                           const GradCheckOptions& options = {});

}  // namespace csiloc::nn
