#include "hatsr/train/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hatsr/error.hpp"
#include "hatsr/nn/network.hpp"
#include "hatsr/ops.hpp"

namespace hatsr::train {

namespace {

double loss_at(const nn::ModelWeights<double>& w, const Tensor<double>& input, const Tensor<double>& target) {
  ag::Graph<double> graph(false);
  nn::Scope<double> scope(graph, w, false);
  return ag::mse(nn::forward(scope, graph.constant(input)), graph.constant(target)).value()[0];
}

}  // namespace

nn::ModelWeights<double> dense_random_weights(const nn::ModelConfig& cfg, std::uint64_t seed, double sigma) {
  nn::ModelWeights<double> w(cfg);
  const auto manifest = nn::parameter_manifest(cfg);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double offset = manifest[i].init == nn::InitKind::kOne ? 1.0 : 0.0;
    for (auto& v : w[i].tensor.values()) v = offset + n(rng);
  }
  return w;
}

GradCheckReport gradient_check(const nn::ModelWeights<double>& weights, const Tensor<double>& input,
                               const Tensor<double>& target, const GradCheckOptions& options) {
  ag::Graph<double> graph(true);
  nn::Scope<double> scope(graph, weights, true);
  const auto loss = ag::mse(nn::forward(scope, graph.constant(input)), graph.constant(target));
  graph.backward(loss);
  const auto grads = scope.gradients();

  nn::ModelWeights<double> probe = weights;
  std::mt19937_64 rng(options.seed);
  GradCheckReport report;
  const double h = options.step;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    auto& t = probe[i].tensor;
    std::vector<std::int64_t> picks(static_cast<std::size_t>(t.size()));
    std::iota(picks.begin(), picks.end(), 0);
    if (options.samples_per_tensor > 0 && picks.size() > static_cast<std::size_t>(options.samples_per_tensor)) {
      std::shuffle(picks.begin(), picks.end(), rng);
      picks.resize(static_cast<std::size_t>(options.samples_per_tensor));
    }
    GradCheckEntry e;
    e.name = probe[i].name;
    for (std::int64_t j : picks) {
      const double orig = t[j];
      t[j] = orig + h;
      const double up = loss_at(probe, input, target);
      t[j] = orig - h;
      const double down = loss_at(probe, input, target);
      t[j] = orig;
      const double numeric = (up - down) / (2 * h);
      const double analytic = grads[i].tensor[j];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), options.floor});
      e.max_rel_error = std::max(e.max_rel_error, std::abs(analytic - numeric) / denom);
      e.max_abs_grad = std::max(e.max_abs_grad, std::abs(analytic));
      e.below_floor += denom == options.floor;
      ++e.checked;
    }
    report.max_rel_error = std::max(report.max_rel_error, e.max_rel_error);
    report.entries.push_back(e);
  }
  return report;
}

GradCheckReport gradient_check(const nn::ModelConfig& cfg, int size, const GradCheckOptions& options) {
  cfg.validate();
  if (size < 1) throw ConfigError("gradient_check: size must be positive");
  const auto w = dense_random_weights(cfg, options.seed);
  std::mt19937_64 rng(options.seed + 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor<double> input({1, size, size, cfg.in_channels});
  for (auto& v : input.values()) v = u(rng);
  Tensor<double> target({1, size * cfg.upscale, size * cfg.upscale, cfg.in_channels});
  for (auto& v : target.values()) v = u(rng);
  return gradient_check(w, input, target, options);
}

}  // namespace hatsr::train
