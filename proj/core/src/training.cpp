#include "csiloc/training.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "csiloc/error.hpp"
#include "csiloc/nn/adam.hpp"
#include "csiloc/nn/loss.hpp"

namespace csiloc::train {
namespace {

using nn::Task;
using nn::Tensor;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, std::size_t line) {
  if (s == "nan") return kNaN;
  std::istringstream in(s);
  double v = 0.0;
  if (!(in >> v) || !in.eof()) throw FormatError("metrics line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

void TrainConfig::validate() const {
  if (batch < 1) throw DomainError("batch size must be >= 1");
  if (epochs < 1) throw DomainError("epoch count must be >= 1");
  adam().validate();
}

nn::AdamConfig TrainConfig::adam() const { return {eta, beta1, beta2, epsilon, bias_correction}; }

Tensor make_inputs(std::span<const prep::Fingerprint> data, std::span<const std::size_t> indices) {
  Tensor batch({indices.size(), prep::kRows, prep::kTones, 1});
  double* out = batch.data();
  for (std::size_t idx : indices) {
    const auto& values = data[idx].values;
    out = std::copy(values.begin(), values.end(), out);
  }
  return batch;
}

Tensor make_targets(Task task, std::size_t classes, std::span<const prep::Fingerprint> data,
                    std::span<const std::size_t> indices) {
  if (task == Task::Regression) {
    Tensor t({indices.size(), 2});
    for (std::size_t r = 0; r < indices.size(); ++r) {
      t[2 * r] = data[indices[r]].position.x;
      t[2 * r + 1] = data[indices[r]].position.y;
    }
    return t;
  }
  Tensor t({indices.size(), classes});
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t c = data[indices[r]].label.index();
    if (c >= classes)
      throw PreconditionError("label " + std::to_string(c + 1) + " outside " + std::to_string(classes) + " classes");
    t[r * classes + c] = 1.0;
  }
  return t;
}

EvalMetrics evaluate(const Predictor& predictor, Task task, std::span<const prep::Fingerprint> data,
                     std::size_t batch) {
  if (data.empty()) throw PreconditionError("cannot evaluate on an empty dataset");
  if (batch < 1) throw DomainError("batch size must be >= 1");
  EvalMetrics m;
  m.task = task;
  m.count = data.size();
  double loss_sum = 0.0;
  std::size_t correct = 0;
  const std::vector<std::size_t> all = iota(data.size());
  for (std::size_t start = 0; start < data.size(); start += batch) {
    const auto idx = std::span(all).subspan(start, std::min(batch, data.size() - start));
    const Tensor out = predictor(make_inputs(data, idx));
    if (out.rank() != 2 || out.dim(0) != idx.size())
      throw ShapeError("predictor returned " + nn::to_string(out.shape()) + " for " + std::to_string(idx.size()) +
                       " samples");
    if (task == Task::Regression) {
      if (out.dim(1) != 2) throw ShapeError("regression predictor must return N x 2");
      const Tensor truth = make_targets(task, 2, data, idx);
      loss_sum += nn::mse_loss_2d(out, truth).value * static_cast<double>(idx.size());
      for (std::size_t r = 0; r < idx.size(); ++r)
        m.euclidean_errors.push_back(std::hypot(out[2 * r] - truth[2 * r], out[2 * r + 1] - truth[2 * r + 1]));
    } else {
      const std::size_t classes = out.dim(1);
      const Tensor truth = make_targets(task, classes, data, idx);
      loss_sum += nn::cross_entropy_loss(out, truth).value * static_cast<double>(idx.size());
      const std::vector<std::size_t> predicted = nn::argmax_rows(out);
      for (std::size_t r = 0; r < idx.size(); ++r)
        if (predicted[r] == data[idx[r]].label.index()) ++correct;
    }
  }
  m.loss = loss_sum / static_cast<double>(data.size());
  if (task == Task::Regression) {
    m.mse = m.loss;
  } else {
    m.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    m.misclassified = data.size() - correct;
  }
  return m;
}

EvalMetrics evaluate(nn::Network& network, std::span<const prep::Fingerprint> data, std::size_t batch) {
  return evaluate([&](const Tensor& x) { return network.forward(x); }, network.spec().task, data, batch);
}

TrainResult train(const nn::NetworkSpec& spec, const prep::DatasetSplit& split, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (split.train.empty()) throw PreconditionError("training set is empty");
  const Task task = spec.task;
  TrainResult result{nn::Network(spec, derive_seed(cfg.seed, {1})), MetricsLog{task, {}, std::nullopt}};
  nn::Network& net = result.network;
  const std::size_t classes = spec.output_size();
  nn::AdamState adam(cfg.adam(), net.parameter_shapes());
  std::vector<nn::Parameter*> params = net.parameters();
  Rng dropout_rng(derive_seed(cfg.seed, {2}));

  std::vector<std::size_t> order = iota(split.train.size());
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, {3, epoch}));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const auto idx = std::span(order).subspan(start, std::min(cfg.batch, order.size() - start));
      const Tensor out = net.forward(make_inputs(split.train, idx), nn::Mode::Train, dropout_rng);
      const Tensor truth = make_targets(task, classes, split.train, idx);
      nn::LossResult loss;
      if (task == Task::Regression) {
        loss = nn::mse_loss_2d(out, truth);
        net.backward(loss.grad, nn::GradientSource::Output);
      } else {
        loss = nn::cross_entropy_loss(out, truth);
        net.backward(loss.grad, nn::GradientSource::Logits);
      }
      if (!std::isfinite(loss.value))
        throw DivergenceError("training loss became non-finite at epoch " + std::to_string(epoch) + ", sample " +
                              std::to_string(start));
      nn::adam_step(params, adam);
      loss_sum += loss.value * static_cast<double>(idx.size());
    }

    EpochMetrics row{static_cast<int>(epoch), loss_sum / static_cast<double>(order.size()), kNaN, kNaN};
    if (!split.validation.empty()) {
      const EvalMetrics v = evaluate(net, split.validation, cfg.batch);
      row.val_loss = v.loss;
      row.val_metric = task == Task::Regression ? v.mse : v.accuracy;
    }
    result.log.epochs.push_back(row);
    if (on_epoch && !on_epoch(row)) break;
  }
  return result;
}

void export_metrics(const MetricsLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "epoch,train_loss,val_loss,val_metric\n";
  auto row = [&](const EpochMetrics& r) {
    out << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.val_loss) << ','
        << format_double(r.val_metric) << '\n';
  };
  for (const EpochMetrics& r : log.epochs) row(r);
  if (log.test) row(EpochMetrics{-1, kNaN, log.test->val_loss, log.test->val_metric});
  if (!out.flush()) throw IoError("write failed: " + path.string());
}

MetricsLog read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "epoch,train_loss,val_loss,val_metric")
    throw FormatError(path.string() + ": missing metrics header");
  MetricsLog log;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream fields(line);
    for (std::string cell; std::getline(fields, cell, ',');) cells.push_back(cell);
    if (cells.size() != 4) throw FormatError("metrics line " + std::to_string(line_no) + ": expected 4 columns");
    int epoch = 0;
    const auto [ptr, ec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), epoch);
    if (ec != std::errc{} || ptr != cells[0].data() + cells[0].size())
      throw FormatError("metrics line " + std::to_string(line_no) + ": bad epoch '" + cells[0] + "'");
    const EpochMetrics row{epoch, parse_double(cells[1], line_no), parse_double(cells[2], line_no),
                           parse_double(cells[3], line_no)};
    if (epoch == -1) {
      log.test = row;
    } else {
      log.epochs.push_back(row);
    }
  }
  return log;
}

}  // namespace csiloc::train
