#include "csiloc/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "csiloc/error.hpp"
#include "csiloc/nn/loss.hpp"

namespace csiloc::nn {
namespace {

double loss_of(const Tensor& output, const Objective& objective) {
  if (const auto* mse = std::get_if<MseObjective>(&objective)) return mse_loss_2d(output, mse->truth).value;
  return cross_entropy_loss(output, std::get<CrossEntropyObjective>(objective).truth_onehot).value;
}

// Sign pattern of every leaky ReLU pre-activation from the last forward pass.
std::vector<bool> kink_pattern(Network& network) {
  std::vector<bool> pattern;
  for (std::size_t i = 0; i < network.layer_count(); ++i) {
    if (const auto* relu = dynamic_cast<const LeakyReluLayer*>(&network.layer(i))) {
      for (double v : relu->last_input().values()) pattern.push_back(v >= 0.0);
    }
  }
  return pattern;
}

}  // namespace

double objective_value(Network& network, const Tensor& input, const Objective& objective) {
  return loss_of(network.forward(input), objective);
}

GradCheckReport grad_check(Network& network, const Tensor& input, const Objective& objective,
                           const GradCheckOptions& options) {
  if (options.mode == Mode::Train && network.has_dropout())
    throw PreconditionError("gradient check refuses to run with dropout in train mode (loss is random)");
  if (!(options.epsilon > 0.0)) throw DomainError("finite-difference step must be > 0");

  // Analytic gradients.
  const Tensor output = network.forward(input);
  if (const auto* mse = std::get_if<MseObjective>(&objective)) {
    network.backward(mse_loss_2d(output, mse->truth).grad, GradientSource::Output);
  } else {
    const auto& ce = std::get<CrossEntropyObjective>(objective);
    network.backward(cross_entropy_loss(output, ce.truth_onehot).grad, GradientSource::Logits);
  }
  const std::vector<bool> baseline = kink_pattern(network);

  GradCheckReport report;
  Rng rng(options.seed);
  for (std::size_t li = 0; li < network.layer_count(); ++li) {
    std::vector<Parameter*> params = network.layer(li).parameters();
    if (params.empty()) continue;

    LayerCheck check;
    check.layer = li;
    check.description = describe(network.layer(li).spec());
    std::vector<std::pair<std::size_t, std::size_t>> candidates;  // (parameter, element)
    for (std::size_t p = 0; p < params.size(); ++p)
      for (std::size_t e = 0; e < params[p]->value.size(); ++e) candidates.emplace_back(p, e);
    check.parameters = candidates.size();
    std::size_t target = candidates.size();
    if (options.max_probes_per_layer > 0 && options.max_probes_per_layer < candidates.size()) {
      std::shuffle(candidates.begin(), candidates.end(), rng);
      target = options.max_probes_per_layer;
    }
    // Forward passes leave the stored gradients untouched.
    for (const auto& [p, e] : candidates) {
      if (check.probed == target) break;
      Tensor& value = params[p]->value;
      const double analytic = params[p]->grad[e];
      const double original = value[e];

      value[e] = original + options.epsilon;
      const double plus = objective_value(network, input, objective);
      const bool kink_plus = kink_pattern(network) != baseline;
      value[e] = original - options.epsilon;
      const double minus = objective_value(network, input, objective);
      const bool kink_minus = kink_pattern(network) != baseline;
      value[e] = original;

      if (kink_plus || kink_minus) {
        ++check.skipped_kinks;
        continue;
      }
      const double numeric = (plus - minus) / (2.0 * options.epsilon);
      const double denom = std::max({std::fabs(analytic), std::fabs(numeric), options.denominator_floor});
      check.max_relative_error = std::max(check.max_relative_error, std::fabs(analytic - numeric) / denom);
      ++check.probed;
    }
    report.max_relative_error = std::max(report.max_relative_error, check.max_relative_error);
    report.probed += check.probed;
    report.skipped_kinks += check.skipped_kinks;
    report.layers.push_back(std::move(check));
  }
  return report;
}

}  // namespace csiloc::nn
