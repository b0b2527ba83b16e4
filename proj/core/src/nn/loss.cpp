#include "csiloc/nn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "csiloc/error.hpp"

namespace csiloc::nn {
namespace {

std::size_t batch_rows(const Tensor& pred, const Tensor& truth, std::size_t cols, const char* what) {
  if (pred.shape() != truth.shape())
    throw ShapeError(std::string(what) + ": prediction " + to_string(pred.shape()) + " vs truth " +
                     to_string(truth.shape()));
  if (pred.rank() != 2 || pred.dim(1) != cols || pred.dim(0) == 0)
    throw ShapeError(std::string(what) + ": expected N x " + std::to_string(cols) + " with N >= 1, got " +
                     to_string(pred.shape()));
  return pred.dim(0);
}

}  // namespace

LossResult mse_loss_2d(const Tensor& pred, const Tensor& truth) {
  const std::size_t n = batch_rows(pred, truth, 2, "mse_loss_2d");
  LossResult r{0.0, Tensor(pred.shape())};
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    r.value += d * d;
    r.grad[i] = 2.0 * d * inv_n;
  }
  r.value *= inv_n;
  return r;
}

LossResult cross_entropy_loss(const Tensor& pred_prob, const Tensor& truth_onehot) {
  if (pred_prob.rank() != 2) throw ShapeError("cross_entropy_loss expects N x C probabilities");
  const std::size_t classes = pred_prob.dim(1);
  const std::size_t n = batch_rows(pred_prob, truth_onehot, classes, "cross_entropy_loss");
  LossResult r{0.0, Tensor(pred_prob.shape())};
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < pred_prob.size(); ++i) {
    const double t = truth_onehot[i];
    if (t != 0.0) r.value -= t * std::log(std::max(pred_prob[i], kProbabilityFloor));
    r.grad[i] = (pred_prob[i] - t) * inv_n;
  }
  r.value *= inv_n;
  return r;
}

}  // namespace csiloc::nn
