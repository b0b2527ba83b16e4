#pragma once

#include "csiloc/nn/tensor.hpp"

namespace csiloc::nn {

/// Probabilities below this are clamped before taking the log.
inline constexpr double kProbabilityFloor = 1e-12;

struct LossResult {
  double value = 0.0;
  Tensor grad;
};

/// J = (1/N) sum_i (x_i - x~_i)^2 + (y_i - y~_i)^2 over N x 2 predictions.
/// grad is dJ/dpred.
LossResult mse_loss_2d(const Tensor& pred, const Tensor& truth);

/// J = -(1/N) sum_i sum_c t_ic log(max(p_ic, floor)) for softmax outputs p.
/// grad is taken with respect to the softmax *input* in fused form,
/// (p - t) / N.
LossResult cross_entropy_loss(const Tensor& pred_prob, const Tensor& truth_onehot);

}  // namespace csiloc::nn
