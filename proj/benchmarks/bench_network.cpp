#include <benchmark/benchmark.h>

#include "hatsr/nn/network.hpp"
#include "hatsr/ops.hpp"
#include "hatsr/nn/weights.hpp"

namespace {

hatsr::nn::ModelConfig small_config() {
  auto cfg = hatsr::nn::toy_config();
  cfg.feat_channels = 16;
  cfg.num_rhag = 1;
  cfg.habs_per_rhag = 2;
  cfg.window_size = 8;
  cfg.num_heads = 2;
  cfg.cbam_reduction = 4;
  return cfg;
}

void BM_ForwardSmall(benchmark::State& state) {
  const auto n = state.range(0);
  const auto weights = hatsr::nn::initialize_weights<float>(small_config(), 1);
  hatsr::Image2D img(n, n, 1.0, 0.5);
  for (auto _ : state) {
    auto sr = hatsr::nn::super_resolve(weights, img);
    benchmark::DoNotOptimize(sr.data.data());
  }
}
BENCHMARK(BM_ForwardSmall)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_TrainStepSmall(benchmark::State& state) {
  const auto weights = hatsr::nn::initialize_weights<float>(small_config(), 1);
  hatsr::Tensor<float> x({4, 32, 32, 1}, 0.25f), y({4, 64, 64, 1}, 0.5f);
  for (auto _ : state) {
    hatsr::ag::Graph<float> g;
    hatsr::nn::Scope<float> s(g, weights, true);
    auto loss = hatsr::ag::mse(hatsr::nn::forward(s, g.constant(x)), g.constant(y));
    g.backward(loss);
    benchmark::DoNotOptimize(loss.value().data());
  }
}
BENCHMARK(BM_TrainStepSmall)->Unit(benchmark::kMillisecond);

}  // namespace
