#include <benchmark/benchmark.h>

#include <random>

#include "hatsr/attention.hpp"
#include "hatsr/ops.hpp"

namespace {

using hatsr::Tensor;
using hatsr::ag::Graph;

Tensor<float> random_tensor(hatsr::Shape shape, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<float> n(0.f, 1.f);
  Tensor<float> t(std::move(shape));
  for (auto& v : t.values()) v = n(rng);
  return t;
}

void BM_Conv3x3(benchmark::State& state) {
  const auto c = state.range(0);
  const auto x = random_tensor({1, 48, 48, c}, 1);
  const auto w = random_tensor({3, 3, c, c}, 2);
  const auto b = random_tensor({c}, 3);
  for (auto _ : state) {
    Graph<float> g(false);
    auto y = hatsr::ag::conv2d(g.constant(x), g.constant(w), g.constant(b));
    benchmark::DoNotOptimize(y.value().data());
  }
  state.SetItemsProcessed(state.iterations() * 48 * 48 * c * c * 9);
}
BENCHMARK(BM_Conv3x3)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_WindowAttention(benchmark::State& state) {
  const int window = static_cast<int>(state.range(0));
  const int heads = 4, c = 32;
  const auto qkv = random_tensor({1, 64, 64, 3 * c}, 4);
  const auto table = random_tensor({(2 * window - 1) * (2 * window - 1), heads}, 5);
  for (auto _ : state) {
    Graph<float> g(false);
    auto y = hatsr::ag::window_attention(g.constant(qkv), g.constant(table), heads, window, window / 2);
    benchmark::DoNotOptimize(y.value().data());
  }
}
BENCHMARK(BM_WindowAttention)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_OverlapAttention(benchmark::State& state) {
  const int window = 8, ow = 12, heads = 4, c = 32;
  const auto qkv = random_tensor({1, 64, 64, 3 * c}, 6);
  const auto table = random_tensor({(window + ow - 1) * (window + ow - 1), heads}, 7);
  for (auto _ : state) {
    Graph<float> g(false);
    auto y = hatsr::ag::overlap_cross_attention(g.constant(qkv), g.constant(table), heads, window, ow);
    benchmark::DoNotOptimize(y.value().data());
  }
}
BENCHMARK(BM_OverlapAttention)->Unit(benchmark::kMillisecond);

}  // namespace
