#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <regex>
#include <string>

#include "csiloc/codec.hpp"
#include "csiloc/environment.hpp"
#include "csiloc/error.hpp"
#include "csiloc/nn/checkpoint.hpp"
#include "csiloc/nn/gradcheck.hpp"
#include "csiloc/preprocess.hpp"
#include "csiloc/training.hpp"
#include "csiloc/zoo.hpp"

namespace csiloc::cli {
namespace {

namespace fs = std::filesystem;

struct SimulateArgs {
  std::uint64_t seed = 0;
  int grids = 63;
  std::size_t packets = 200;
  bool imbalance = false;
  double scatter = 0.05;
  double noise = 0.01;
  unsigned workers = 0;
  fs::path out;
};

struct DecodeArgs {
  fs::path in;
  bool filter = false;
};

struct PreprocessArgs {
  fs::path in;
  fs::path out;
  std::size_t window = prep::kDefaultWindow;
};

struct SplitArgs {
  fs::path in;
  fs::path out;
  std::uint64_t seed = 0;
  prep::SplitFractions fractions;
};

struct TrainArgs {
  std::string task;
  fs::path data;
  train::TrainConfig config;
  fs::path out;
  fs::path metrics;
};

struct EvaluateArgs {
  fs::path model;
  fs::path data;
};

struct GradcheckArgs {
  std::size_t probes = 200;
  std::size_t samples = 2;
  std::uint64_t seed = 0;
  double tolerance = 1e-4;
  double epsilon = 1e-4;
};

int simulate(const SimulateArgs& a, std::ostream& out) {
  env::GenConfig config;
  config.master_seed = a.seed;
  config.grids = a.grids;
  config.scatter_ratio = a.scatter;
  config.csi_noise_sigma2 = a.noise;
  if (a.imbalance) {
    config.packets_per_grid = env::ImbalancedCount{};
  } else {
    config.packets_per_grid = env::FixedCount{a.packets};
  }
  const std::vector<env::GridSummary> grids = env::generate_dataset(config, env::EnvironmentSpec{}, a.out, a.workers);
  std::size_t total = 0;
  for (const auto& g : grids) total += g.count;
  out << "wrote " << grids.size() << " grid logs, " << total << " packets, to " << a.out.string() << "\n";
  return 0;
}

int decode(const DecodeArgs& a, std::ostream& out) {
  codec::LogContents log = codec::read_log_file(a.in);
  const std::size_t read = log.packets.size();
  if (a.filter) log.packets = codec::filter_packets(log.packets);
  std::size_t i = 0;
  for (const codec::CsiPacket& p : log.packets) {
    out << i++ << " ts=" << p.timestamp << " ch=" << p.channel << " bw=" << (p.bandwidth ? 40 : 20)
        << " tones=" << int{p.num_tones} << " nr=" << int{p.nr} << " nc=" << int{p.nc} << " rssi=" << int{p.rssi1}
        << "/" << int{p.rssi2} << "/" << int{p.rssi3} << " noise=" << int{p.noise_floor}
        << " payload=" << p.payload_len << "\n";
  }
  out << "declared " << log.declared_count << ", decoded " << read;
  if (a.filter) out << ", kept " << log.packets.size();
  out << "\n";
  if (log.diagnostic) {
    out << "warning: " << *log.diagnostic << "\n";
    return 2;
  }
  return 0;
}

// grid_<label>.csilog files in `dir`, ordered by label.
std::map<int, fs::path> grid_logs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
  static const std::regex pattern(R"(grid_(\d+)\.csilog)");
  std::map<int, fs::path> logs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) logs.emplace(std::stoi(m[1].str()), entry.path());
  }
  if (logs.empty()) throw IoError("no grid_<label>.csilog files in " + dir.string());
  return logs;
}

int preprocess(const PreprocessArgs& a, std::ostream& out) {
  std::vector<prep::Fingerprint> fingerprints;
  std::size_t dropped = 0;
  for (const auto& [label, path] : grid_logs(a.in)) {
    codec::LogContents log = codec::read_log_file(path);
    if (log.diagnostic) throw FormatError(path.string() + ": " + *log.diagnostic);
    for (const codec::CsiPacket& p : log.packets) {
      if (!codec::passes_filter(p)) {
        ++dropped;
        continue;
      }
      fingerprints.push_back(prep::pipeline(p, env::GridLabel(label), a.window));
    }
  }
  prep::write_dataset(a.out, fingerprints);
  out << "wrote " << fingerprints.size() << " fingerprints to " << a.out.string() << " (" << dropped
      << " packets filtered out)\n";
  return 0;
}

int split(const SplitArgs& a, std::ostream& out) {
  const std::vector<prep::Fingerprint> data = prep::read_dataset(a.in);
  const prep::DatasetSplit s = prep::split_dataset(data, a.seed, a.fractions);
  const fs::path dir = a.out.empty() ? a.in.parent_path() : a.out;
  if (!dir.empty()) fs::create_directories(dir);
  const std::string stem = a.in.stem().string();
  const std::pair<const char*, const std::vector<prep::Fingerprint>*> parts[] = {
      {"train", &s.train}, {"validation", &s.validation}, {"test", &s.test}};
  for (const auto& [name, set] : parts) {
    const fs::path path = dir / (stem + "." + name + ".csids");
    prep::write_dataset(path, *set);
    out << name << ": " << set->size() << " -> " << path.string() << "\n";
  }
  return 0;
}

int run_train(TrainArgs a, std::ostream& out) {
  const nn::NetworkSpec spec =
      a.task == "regression" ? zoo::build_regression_net() : zoo::build_classification_net();
  const std::vector<prep::Fingerprint> data = prep::read_dataset(a.data);
  const prep::DatasetSplit s = prep::split_dataset(data, a.config.seed);
  out << "train " << s.train.size() << ", validation " << s.validation.size() << ", test " << s.test.size()
      << "; " << zoo::param_count(spec) << " parameters\n";

  const char* metric = spec.task == nn::Task::Regression ? "val_mse" : "val_accuracy";
  train::TrainResult result = train::train(spec, s, a.config, [&](const train::EpochMetrics& m) {
    out << "epoch " << m.epoch << " train_loss " << m.train_loss << " val_loss " << m.val_loss << " " << metric
        << " " << m.val_metric << std::endl;
    return true;
  });
  if (!s.test.empty()) {
    const train::EvalMetrics t = train::evaluate(result.network, s.test);
    const double value = spec.task == nn::Task::Regression ? t.mse : t.accuracy;
    result.log.test = train::EpochMetrics{-1, std::nan(""), t.loss, value};
    out << "test loss " << t.loss << " " << (spec.task == nn::Task::Regression ? "mse " : "accuracy ") << value
        << "\n";
  }
  if (!a.out.empty()) nn::save_checkpoint(result.network, a.out);
  if (!a.metrics.empty()) train::export_metrics(result.log, a.metrics);
  return 0;
}

int evaluate(const EvaluateArgs& a, std::ostream& out) {
  nn::Network net = nn::load_checkpoint(a.model);
  const std::vector<prep::Fingerprint> data = prep::read_dataset(a.data);
  const train::EvalMetrics m = train::evaluate(net, data);
  out << "samples " << m.count << "\n";
  if (m.task == nn::Task::Regression) {
    std::vector<double> e = m.euclidean_errors;
    std::sort(e.begin(), e.end());
    double mean = 0.0;
    for (double v : e) mean += v;
    mean /= static_cast<double>(e.size());
    out << "mse " << m.mse << "\nmean_error_m " << mean << "\nmedian_error_m " << e[e.size() / 2] << "\n";
  } else {
    out << "loss " << m.loss << "\naccuracy " << m.accuracy << "\nmisclassified " << m.misclassified << "\n";
  }
  return 0;
}

int gradcheck(const GradcheckArgs& a, std::ostream& out) {
  double worst = 0.0;
  for (const nn::NetworkSpec& spec : {zoo::build_regression_net(), zoo::build_classification_net()}) {
    nn::Network net(spec, a.seed);
    Rng rng(derive_seed(a.seed, {7}));
    std::normal_distribution<double> normal;
    nn::Tensor x({a.samples, prep::kRows, prep::kTones, 1});
    for (double& v : x.values()) v = normal(rng);
    nn::Objective objective;
    if (spec.task == nn::Task::Regression) {
      nn::Tensor t({a.samples, 2});
      for (double& v : t.values()) v = 3.0 * uniform01(rng);
      objective = nn::MseObjective{t};
    } else {
      nn::Tensor t({a.samples, 63});
      for (std::size_t r = 0; r < a.samples; ++r) t[r * 63 + rng() % 63] = 1.0;
      objective = nn::CrossEntropyObjective{t};
    }
    nn::GradCheckOptions options;
    options.max_probes_per_layer = a.probes;
    options.seed = a.seed;
    options.epsilon = a.epsilon;
    const nn::GradCheckReport report = nn::grad_check(net, x, objective, options);
    out << nn::to_string(spec.task) << "\n";
    for (const nn::LayerCheck& l : report.layers)
      out << "  layer " << l.layer << " " << l.description << ": probed " << l.probed << "/" << l.parameters
          << ", kinks skipped " << l.skipped_kinks << ", max rel err " << l.max_relative_error << "\n";
    worst = std::max(worst, report.max_relative_error);
  }
  out << "max relative error " << worst << " (tolerance " << a.tolerance << ")\n";
  return worst < a.tolerance ? 0 : 2;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"WiFi CSI fingerprint localization: simulate, preprocess, train, evaluate"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Synthesize per-grid CSI logs and a manifest");
  simulate_cmd->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
  simulate_cmd->add_option("--grids", sim.grids, "Number of grid cells (labels 1..N)")
      ->capture_default_str()
      ->check(CLI::Range(1, 63));
  auto* packets_opt = simulate_cmd->add_option("--packets", sim.packets, "Packets per grid")->capture_default_str();
  simulate_cmd->add_flag("--imbalance", sim.imbalance, "Imbalanced per-grid counts (min 1208, median 1343, max 2365)")
      ->excludes(packets_opt);
  simulate_cmd->add_option("--scatter", sim.scatter, "Scatter ratio rho")->capture_default_str();
  simulate_cmd->add_option("--noise", sim.noise, "CSI estimation noise variance")->capture_default_str();
  simulate_cmd->add_option("--workers", sim.workers, "Worker threads (0: hardware concurrency)")
      ->capture_default_str();
  simulate_cmd->add_option("--out", sim.out, "Output directory")->required();

  DecodeArgs dec;
  auto* decode_cmd = app.add_subcommand("decode", "Print packet summaries from a .csilog");
  decode_cmd->add_option("--in", dec.in, "Input log")->required()->check(CLI::ExistingFile);
  decode_cmd->add_flag("--filter", dec.filter, "Keep only 20 MHz, 56-tone, 3x3 packets");

  PreprocessArgs pre;
  auto* preprocess_cmd = app.add_subcommand("preprocess", "Turn a directory of grid logs into one .csids dataset");
  preprocess_cmd->add_option("--in", pre.in, "Directory of grid_<label>.csilog files")
      ->required()
      ->check(CLI::ExistingDirectory);
  preprocess_cmd->add_option("--out", pre.out, "Output .csids file")->required();
  preprocess_cmd->add_option("--window", pre.window, "Moving-average window")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  SplitArgs spl;
  auto* split_cmd = app.add_subcommand("split", "Stratified train/validation/test split of a .csids dataset");
  split_cmd->add_option("--in", spl.in, "Input .csids file")->required()->check(CLI::ExistingFile);
  split_cmd->add_option("--out", spl.out, "Output directory (default: next to the input)");
  split_cmd->add_option("--seed", spl.seed, "Shuffle seed")->capture_default_str();
  split_cmd->add_option("--train", spl.fractions.train, "Training fraction")->capture_default_str();
  split_cmd->add_option("--validation", spl.fractions.validation, "Validation fraction")->capture_default_str();
  split_cmd->add_option("--test", spl.fractions.test, "Test fraction")->capture_default_str();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a network on a .csids dataset (75/10/15 split by --seed)");
  train_cmd->add_option("--task", tr.task, "regression or classification")
      ->required()
      ->check(CLI::IsMember({"regression", "classification"}));
  train_cmd->add_option("--data", tr.data, "Input .csids file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--epochs", tr.config.epochs, "Epochs")->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", tr.config.eta, "Adam learning rate")->capture_default_str();
  train_cmd->add_option("--batch", tr.config.batch, "Minibatch size")->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", tr.config.seed, "Seed for split, initialization, shuffling and dropout")
      ->capture_default_str();
  train_cmd->add_flag("--bias-correction", tr.config.bias_correction, "Adam bias correction (default off)");
  train_cmd->add_option("--out", tr.out, "Checkpoint path");
  train_cmd->add_option("--metrics", tr.metrics, "Metrics CSV path");

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate a checkpoint on a .csids dataset");
  evaluate_cmd->add_option("--model", ev.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--data", ev.data, "Input .csids file")->required()->check(CLI::ExistingFile);

  GradcheckArgs gc;
  auto* gradcheck_cmd =
      app.add_subcommand("gradcheck", "Finite-difference gradient check of both architectures (dropout off)");
  gradcheck_cmd->add_option("--probes", gc.probes, "Probed parameters per layer (0: all)")->capture_default_str();
  gradcheck_cmd->add_option("--samples", gc.samples, "Random input samples")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  gradcheck_cmd->add_option("--seed", gc.seed, "Seed")->capture_default_str();
  gradcheck_cmd->add_option("--tolerance", gc.tolerance, "Maximum relative error")->capture_default_str();
  gradcheck_cmd->add_option("--epsilon", gc.epsilon, "Finite-difference step")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (*simulate_cmd) return simulate(sim, out);
    if (*decode_cmd) return decode(dec, out);
    if (*preprocess_cmd) return preprocess(pre, out);
    if (*split_cmd) return split(spl, out);
    if (*train_cmd) return run_train(tr, out);
    if (*evaluate_cmd) return evaluate(ev, out);
    if (*gradcheck_cmd) return gradcheck(gc, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace csiloc::cli
