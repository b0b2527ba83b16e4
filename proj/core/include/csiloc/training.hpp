#pragma once

// Minibatch Adam training, evaluation and metrics CSV export.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "csiloc/nn/adam.hpp"
#include "csiloc/nn/network.hpp"
#include "csiloc/preprocess.hpp"

namespace csiloc::train {

struct TrainConfig {
  double eta = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch = 256;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  bool bias_correction = false;

  void validate() const;
  nn::AdamConfig adam() const;
};

/// val_metric is accuracy for classification and MSE for regression. For the
/// test row train_loss is NaN.
struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_metric = 0.0;
};

struct MetricsLog {
  nn::Task task = nn::Task::Regression;
  std::vector<EpochMetrics> epochs;
  std::optional<EpochMetrics> test;  // written with epoch = -1
};

struct EvalMetrics {
  nn::Task task = nn::Task::Regression;
  std::size_t count = 0;
  double loss = 0.0;  // MSE or cross-entropy
  // regression
  double mse = 0.0;
  std::vector<double> euclidean_errors;
  // classification
  double accuracy = 0.0;
  std::size_t misclassified = 0;
};

/// N x 9 x 56 x 1 input batch from the chosen fingerprints.
nn::Tensor make_inputs(std::span<const prep::Fingerprint> data, std::span<const std::size_t> indices);
/// N x 2 positions (regression) or N x classes one-hot (classification).
nn::Tensor make_targets(nn::Task task, std::size_t classes, std::span<const prep::Fingerprint> data,
                        std::span<const std::size_t> indices);

/// Evaluation in eval mode, in chunks of `batch`. Throws PreconditionError on
/// an empty dataset.
EvalMetrics evaluate(nn::Network& network, std::span<const prep::Fingerprint> data, std::size_t batch = 256);

/// Maps an N x 9 x 56 x 1 batch to N x 2 positions or N x classes
/// probabilities.
using Predictor = std::function<nn::Tensor(const nn::Tensor&)>;
EvalMetrics evaluate(const Predictor& predictor, nn::Task task, std::span<const prep::Fingerprint> data,
                     std::size_t batch = 256);

/// Called after every epoch; returning false stops training early.
using EpochCallback = std::function<bool(const EpochMetrics&)>;

struct TrainResult {
  nn::Network network;
  MetricsLog log;
};

/// Shuffles the training set every epoch, steps Adam on each minibatch (the
/// last one may be partial) and validates in eval mode after each epoch.
/// Validation fields are NaN when the validation set is empty. The result is
/// a deterministic function of (spec, split, cfg). Throws DivergenceError
/// when the training loss stops being finite.
TrainResult train(const nn::NetworkSpec& spec, const prep::DatasetSplit& split, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Header epoch,train_loss,val_loss,val_metric; one row per epoch, then the
/// test row if present.
void export_metrics(const MetricsLog& log, const std::filesystem::path& path);
MetricsLog read_metrics_csv(const std::filesystem::path& path);

}  // namespace csiloc::train
