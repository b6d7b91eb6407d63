#include <cmath>
#include <random>

#include "doctest.h"
#include "hatsr/attention.hpp"

using hatsr::Tensor;
using namespace hatsr::ag;

namespace {

Tensor<double> random_tensor(hatsr::Shape shape, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n(0, 1);
  Tensor<double> t(std::move(shape));
  for (auto& v : t.values()) v = n(rng);
  return t;
}

}  // namespace

TEST_CASE("window attention rows are probability distributions") {
  const int heads = 2, window = 4, c = 8;
  const auto qkv = random_tensor({1, 8, 8, 3 * c}, 1);
  const auto table = random_tensor({(2 * window - 1) * (2 * window - 1), heads}, 2);
  for (int shift : {0, 2}) {
    const auto p = window_attention_probs(qkv, table, heads, window, shift);
    const auto keys = p.dim(4);
    for (std::size_t r = 0; r < p.size() / keys; ++r) {
      double s = 0;
      for (std::int64_t k = 0; k < keys; ++k) s += p[r * keys + k];
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("shifted windows mask tokens from different regions") {
  const int heads = 1, window = 4, c = 2;
  const auto qkv = random_tensor({1, 8, 8, 3 * c}, 3);
  const auto table = Tensor<double>({49, heads});
  const auto p = window_attention_probs(qkv, table, heads, window, 2);
  // The last window straddles the wrap-around in both axes: its top-left
  // query may not attend to the bottom-right key.
  const auto windows = p.dim(1), q = p.dim(3), k = p.dim(4);
  const std::size_t base = static_cast<std::size_t>((windows - 1) * q * k);
  CHECK(p[base + static_cast<std::size_t>(k - 1)] == 0.0);
  CHECK(p[base + 0] > 0.0);
}

TEST_CASE("overlap attention with equal windows is plain window attention") {
  const int heads = 2, window = 4, c = 4;
  const auto qkv = random_tensor({2, 8, 8, 3 * c}, 4);
  const auto table = random_tensor({49, heads}, 5);
  Graph<double> g(false);
  const auto a = window_attention(g.constant(qkv), g.constant(table), heads, window, 0).value();
  const auto b = overlap_cross_attention(g.constant(qkv), g.constant(table), heads, window, window).value();
  REQUIRE(a.shape() == b.shape());
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  CHECK(worst < 1e-12);
}

TEST_CASE("overlap attention probabilities normalize over the enlarged window") {
  const int heads = 2, window = 4, ow = 6, c = 4;
  const auto qkv = random_tensor({1, 8, 8, 3 * c}, 6);
  const auto table = random_tensor({(window + ow - 1) * (window + ow - 1), heads}, 7);
  const auto p = overlap_attention_probs(qkv, table, heads, window, ow);
  CHECK(p.dim(4) == ow * ow);
  CHECK(p.dim(3) == window * window);
  for (std::size_t r = 0; r < p.size() / (ow * ow); ++r) {
    double s = 0;
    for (int k = 0; k < ow * ow; ++k) s += p[r * ow * ow + k];
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}
