#include <benchmark/benchmark.h>

#include "hatsr/phantom/degrade.hpp"
#include "hatsr/phantom/phantom.hpp"

namespace {

void BM_KspaceTruncate(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const auto hr = hatsr::phantom::generate_phantom(hatsr::phantom::default_knee_spec(size));
  hatsr::phantom::DegradationConfig cfg;
  for (auto _ : state) {
    auto lr = hatsr::phantom::kspace_truncate(hr, cfg);
    benchmark::DoNotOptimize(lr.data.data());
  }
}
BENCHMARK(BM_KspaceTruncate)->Arg(128)->Arg(384)->Unit(benchmark::kMillisecond);

void BM_GeneratePhantom(benchmark::State& state) {
  const auto spec = hatsr::phantom::default_knee_spec(384);
  for (auto _ : state) {
    auto img = hatsr::phantom::generate_phantom(spec);
    benchmark::DoNotOptimize(img.data.data());
  }
}
BENCHMARK(BM_GeneratePhantom)->Unit(benchmark::kMillisecond);

}  // namespace
