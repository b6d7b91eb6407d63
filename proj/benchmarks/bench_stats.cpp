#include <benchmark/benchmark.h>

#include <random>

#include "hatsr/stats/agreement.hpp"
#include "hatsr/stats/diagnostic.hpp"
#include "hatsr/stats/tests.hpp"

namespace {

void BM_FriedmanExact(benchmark::State& state) {
  const auto n = state.range(0);
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> d(1, 5);
  std::vector<std::vector<double>> scores(static_cast<std::size_t>(n), std::vector<double>(3));
  for (auto& row : scores)
    for (auto& v : row) v = d(rng);
  for (auto _ : state) benchmark::DoNotOptimize(hatsr::stats::friedman_test(scores).p);
}
BENCHMARK(BM_FriedmanExact)->Arg(6)->Arg(24)->Arg(54);

void BM_GwetAc2(benchmark::State& state) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> d(0, 4);
  std::vector<std::vector<int>> m(54, std::vector<int>(3));
  for (auto& row : m)
    for (auto& v : row) v = d(rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(hatsr::stats::gwet_ac2(m, 5, hatsr::stats::Weighting::kLinear).coefficient);
}
BENCHMARK(BM_GwetAc2);

void BM_RocAucBootstrap(benchmark::State& state) {
  std::mt19937 rng(9);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> scores(60);
  std::vector<int> pos(60);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    pos[i] = i % 4 == 0 ? 1 : 0;
    scores[i] = n(rng) + (pos[i] ? 1.0 : 0.0);
  }
  for (auto _ : state) benchmark::DoNotOptimize(hatsr::stats::roc_auc(scores, pos, 2000, 1).auc);
}
BENCHMARK(BM_RocAucBootstrap)->Unit(benchmark::kMillisecond);

}  // namespace
