#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "csiloc/nn/layers.hpp"
#include "csiloc/nn/tensor.hpp"

namespace csiloc::nn {

struct AdamConfig {
  double eta = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Off: the plain moment update
  ///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2,
  ///   theta <- theta - eta m / (sqrt(v) + eps).
  /// On: m and v are divided by (1 - b^t) before the parameter update.
  bool bias_correction = false;

  void validate() const;
};

/// First/second moment estimates for each parameter tensor plus the step
/// counter.
class AdamState {
 public:
  AdamState(AdamConfig config, const std::vector<Shape>& parameter_shapes);

  const AdamConfig& config() const noexcept { return config_; }
  std::uint64_t step() const noexcept { return t_; }
  const std::vector<Tensor>& first_moment() const noexcept { return m_; }
  const std::vector<Tensor>& second_moment() const noexcept { return v_; }

 private:
  friend void adam_step(std::span<Tensor* const>, std::span<const Tensor* const>, AdamState&);

  AdamConfig config_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::uint64_t t_ = 0;
};

/// One elementwise update of every parameter from its gradient.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, AdamState& state);

/// Convenience overload over layer parameters (value updated from grad).
void adam_step(std::span<Parameter* const> params, AdamState& state);

}  // namespace csiloc::nn
