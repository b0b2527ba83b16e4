#include <benchmark/benchmark.h>

#include <random>

#include "csiloc/codec.hpp"
#include "csiloc/environment.hpp"
#include "csiloc/nn/network.hpp"
#include "csiloc/nn/ops.hpp"
#include "csiloc/preprocess.hpp"
#include "csiloc/zoo.hpp"

using namespace csiloc;

namespace {

nn::Tensor random_batch(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  nn::Tensor x({n, 9, 56, 1});
  for (double& v : x.values()) v = normal(rng);
  return x;
}

codec::CsiPacket sample_packet() {
  env::GenConfig cfg;
  cfg.grids = 1;
  return env::synthesize_grid(env::GridLabel(1), 1, cfg).front();
}

}  // namespace

static void BM_SynthesizeGrid(benchmark::State& state) {
  env::GenConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(env::synthesize_grid(env::GridLabel(17), 200, cfg));
  state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_SynthesizeGrid)->Unit(benchmark::kMillisecond);

static void BM_EncodeDecode(benchmark::State& state) {
  const codec::CsiPacket p = sample_packet();
  for (auto _ : state) {
    const codec::Bytes b = codec::encode_packet(p);
    benchmark::DoNotOptimize(codec::decode_packet(b));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(codec::encoded_size(p)));
}
BENCHMARK(BM_EncodeDecode);

static void BM_Pipeline(benchmark::State& state) {
  const codec::CsiPacket p = sample_packet();
  for (auto _ : state) benchmark::DoNotOptimize(prep::pipeline(p, env::GridLabel(1)));
}
BENCHMARK(BM_Pipeline);

static void BM_Conv1Forward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const nn::Tensor x = random_batch(n, 1);
  nn::Tensor w({4, 4, 1, 32}, 0.01), b({32}, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv2d(x, w, b, nn::Stride{1, 4}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Conv1Forward)->Arg(1)->Arg(256);

template <bool Classification>
static void BM_TrainStep(benchmark::State& state) {
  const auto spec = Classification ? zoo::build_classification_net() : zoo::build_regression_net();
  nn::Network net(spec, 1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const nn::Tensor x = random_batch(n, 2);
  Rng rng(3);
  for (auto _ : state) {
    const nn::Tensor out = net.forward(x, nn::Mode::Train, rng);
    net.backward(out, Classification ? nn::GradientSource::Logits : nn::GradientSource::Output);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainStep<false>)->Name("BM_TrainStep/regression")->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainStep<true>)->Name("BM_TrainStep/classification")->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
