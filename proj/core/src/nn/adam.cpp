#include "csiloc/nn/adam.hpp"

#include <cmath>
#include <string>

#include "csiloc/error.hpp"

namespace csiloc::nn {

void AdamConfig::validate() const {
  if (!(eta > 0.0)) throw DomainError("learning rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw DomainError("Adam decay rates must lie in [0, 1)");
  if (!(epsilon >= 0.0)) throw DomainError("Adam epsilon must be >= 0");
}

AdamState::AdamState(AdamConfig config, const std::vector<Shape>& parameter_shapes) : config_(config) {
  config_.validate();
  for (const Shape& s : parameter_shapes) {
    m_.emplace_back(s);
    v_.emplace_back(s);
  }
}

void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m_.size())
    throw ShapeError("adam_step got " + std::to_string(params.size()) + " parameters, " +
                     std::to_string(grads.size()) + " gradients and state for " + std::to_string(state.m_.size()));
  const AdamConfig& c = state.config_;
  ++state.t_;
  const double t = static_cast<double>(state.t_);
  const double m_scale = c.bias_correction ? 1.0 / (1.0 - std::pow(c.beta1, t)) : 1.0;
  const double v_scale = c.bias_correction ? 1.0 / (1.0 - std::pow(c.beta2, t)) : 1.0;

  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& theta = *params[p];
    const Tensor& g = *grads[p];
    Tensor& m = state.m_[p];
    Tensor& v = state.v_[p];
    if (theta.shape() != g.shape() || theta.shape() != m.shape())
      throw ShapeError("adam_step shape mismatch at parameter " + std::to_string(p) + ": " +
                       to_string(theta.shape()) + " vs grad " + to_string(g.shape()));
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      theta[i] -= c.eta * (m[i] * m_scale) / (std::sqrt(v[i] * v_scale) + c.epsilon);
    }
  }
}

void adam_step(std::span<Parameter* const> params, AdamState& state) {
  std::vector<Tensor*> values;
  std::vector<const Tensor*> grads;
  for (Parameter* p : params) {
    values.push_back(&p->value);
    grads.push_back(&p->grad);
  }
  adam_step(values, grads, state);
}

}  // namespace csiloc::nn
