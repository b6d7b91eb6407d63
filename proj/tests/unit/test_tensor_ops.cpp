#include <cmath>
#include <random>

#include "doctest.h"
#include "hatsr/error.hpp"
#include "hatsr/ops.hpp"

using hatsr::Shape;
using hatsr::Tensor;
using namespace hatsr::ag;

namespace {

Tensor<double> random_tensor(Shape shape, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  Tensor<double> t(std::move(shape));
  for (auto& v : t.values()) v = u(rng);
  return t;
}

// Central-difference check of d(sum(f(x) * probe))/dx against the tape.
template <typename F>
double max_grad_error(F f, Tensor<double> x, unsigned seed) {
  Tensor<double> probe;
  {
    Graph<double> g(false);
    probe = random_tensor(f(g.constant(x)).shape(), seed);
  }
  Graph<double> g;
  auto xv = g.variable(x);
  auto loss = sum(mul(f(xv), g.constant(probe)));
  g.backward(loss);
  const auto analytic = xv.grad();

  double worst = 0;
  const double h = 1e-6;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto eval = [&](double delta) {
      auto xp = x;
      xp[i] += delta;
      Graph<double> g2(false);
      return sum(mul(f(g2.constant(xp)), g2.constant(probe))).value()[0];
    };
    const double numeric = (eval(h) - eval(-h)) / (2 * h);
    worst = std::max(worst, std::abs(numeric - analytic[i]));
  }
  return worst;
}

}  // namespace

TEST_CASE("tensor shape bookkeeping") {
  Tensor<float> t({2, 3, 4, 5}, 1.5f);
  CHECK(t.size() == 120);
  CHECK(t.rank() == 4);
  CHECK(t.at(1, 2, 3, 4) == 1.5f);
  auto r = t.reshaped({6, 20});
  CHECK(r.dim(0) == 6);
  CHECK(r.size() == t.size());
  CHECK_THROWS(t.reshaped({7, 20}));
  CHECK(hatsr::shape_string({2, 3}) == "[2,3]");
}

TEST_CASE("reflect index folds without repeating the edge") {
  CHECK(reflect_index(0, 5) == 0);
  CHECK(reflect_index(5, 5) == 3);
  CHECK(reflect_index(6, 5) == 2);
  CHECK(reflect_index(-1, 5) == 1);
  CHECK(reflect_index(12, 5) == 4);
  CHECK(reflect_index(3, 1) == 0);
}

TEST_CASE("conv2d matches a direct zero-padded sum") {
  const auto x = random_tensor({2, 5, 6, 3}, 1);
  const auto w = random_tensor({3, 3, 3, 4}, 2);
  const auto b = random_tensor({4}, 3);
  Graph<double> g(false);
  const auto y = conv2d(g.constant(x), g.constant(w), g.constant(b)).value();
  REQUIRE(y.shape() == Shape{2, 5, 6, 4});
  double worst = 0;
  for (int n = 0; n < 2; ++n)
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 6; ++j)
        for (int o = 0; o < 4; ++o) {
          double acc = b[o];
          for (int di = -1; di <= 1; ++di)
            for (int dj = -1; dj <= 1; ++dj) {
              if (i + di < 0 || i + di >= 5 || j + dj < 0 || j + dj >= 6) continue;
              for (int c = 0; c < 3; ++c) acc += x.at(n, i + di, j + dj, c) * w[((di + 1) * 3 + dj + 1) * 12 + c * 4 + o];
            }
          worst = std::max(worst, std::abs(acc - y.at(n, i, j, o)));
        }
  CHECK(worst < 1e-12);
}

TEST_CASE("pixel shuffle places channel blocks on the sub-pixel grid") {
  Tensor<double> x({1, 1, 1, 4});
  for (int c = 0; c < 4; ++c) x[c] = c;
  Graph<double> g(false);
  const auto y = pixel_shuffle(g.constant(x), 2).value();
  REQUIRE(y.shape() == Shape{1, 2, 2, 1});
  CHECK(y.at(0, 0, 0, 0) == 0);
  CHECK(y.at(0, 0, 1, 0) == 1);
  CHECK(y.at(0, 1, 0, 0) == 2);
  CHECK(y.at(0, 1, 1, 0) == 3);
}

TEST_CASE("layer norm rows have zero mean and unit variance") {
  const auto x = random_tensor({3, 8}, 4);
  Graph<double> g(false);
  const auto y = layer_norm(g.constant(x), g.constant(Tensor<double>({8}, 1.0)), g.constant(Tensor<double>({8})),
                            1e-12).value();
  for (int r = 0; r < 3; ++r) {
    double m = 0, v = 0;
    for (int c = 0; c < 8; ++c) m += y[r * 8 + c] / 8;
    for (int c = 0; c < 8; ++c) v += (y[r * 8 + c] - m) * (y[r * 8 + c] - m) / 8;
    CHECK(m == doctest::Approx(0).epsilon(1e-12));
    CHECK(v == doctest::Approx(1).epsilon(1e-9));
  }
}

TEST_CASE("elementwise ops reject mismatched shapes") {
  Graph<double> g(false);
  auto a = g.constant(Tensor<double>({2, 3}));
  auto b = g.constant(Tensor<double>({3, 2}));
  CHECK_THROWS_AS(add(a, b), hatsr::InputError);
}

TEST_CASE("backward matches central differences") {
  const auto x = random_tensor({1, 4, 5, 3}, 5);
  const auto w = random_tensor({3, 3, 3, 2}, 6);
  const auto b = random_tensor({2}, 7);
  const auto lw = random_tensor({3, 4}, 8);
  const auto lb = random_tensor({4}, 9);
  const auto gamma = random_tensor({3}, 10);
  const auto beta = random_tensor({3}, 11);

  SUBCASE("conv2d") {
    CHECK(max_grad_error([&](const Var<double>& v) { return conv2d(v, v.graph().constant(w), v.graph().constant(b)); },
                         x, 12) < 1e-8);
  }
  SUBCASE("linear and gelu") {
    CHECK(max_grad_error(
              [&](const Var<double>& v) { return gelu(linear(v, v.graph().constant(lw), v.graph().constant(lb))); },
              x, 13) < 1e-8);
  }
  SUBCASE("layer norm") {
    CHECK(max_grad_error(
              [&](const Var<double>& v) { return layer_norm(v, v.graph().constant(gamma), v.graph().constant(beta)); },
              x, 14) < 1e-7);
  }
  SUBCASE("pooling gates") {
    CHECK(max_grad_error([&](const Var<double>& v) { return mul_channel_gate(v, sigmoid(global_avg_pool(v))); }, x,
                         15) < 1e-8);
    CHECK(max_grad_error([&](const Var<double>& v) { return mul_spatial_gate(v, sigmoid(channel_mean(v))); }, x, 16) <
          1e-8);
  }
  SUBCASE("padding, cropping and shuffling") {
    CHECK(max_grad_error([&](const Var<double>& v) { return crop(reflect_pad(v, 3, 2), 5, 6); }, x, 17) < 1e-8);
    const auto x4 = random_tensor({1, 2, 3, 4}, 18);
    CHECK(max_grad_error([&](const Var<double>& v) { return pixel_shuffle(v, 2); }, x4, 19) < 1e-8);
  }
}
