#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hatsr/nn/weights.hpp"

namespace hatsr::train {

struct GradCheckEntry {
  std::string name;
  std::size_t checked = 0;  // entries compared
  std::size_t below_floor = 0;  // entries with both gradients under the floor
  double max_rel_error = 0;
  double max_abs_grad = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;  // manifest order, every parameter
  double max_rel_error = 0;
  bool passed(double tol = 1e-4) const { return max_rel_error <= tol; }
};

struct GradCheckOptions {
  double step = 1e-5;
  int samples_per_tensor = 6;  // 0 checks every entry
  std::uint64_t seed = 0;
  /// Relative errors use max(|analytic|, |numeric|, floor) as denominator.
  /// Central differences of an O(1) loss carry roundoff near eps / step
  /// (about 1e-11), so gradients that vanish exactly, such as key biases
  /// under softmax shift invariance, need a floor well above that.
  double floor = 1e-6;
};

/// Analytic gradient of MSE(forward(input), target) against central
/// differences, sampled per parameter tensor.
GradCheckReport gradient_check(const nn::ModelWeights<double>& weights, const Tensor<double>& input,
                               const Tensor<double>& target, const GradCheckOptions& options = {});

/// Random dense weights (no zero branches, so every parameter receives a
/// gradient), a random size x size input and a matching random target.
GradCheckReport gradient_check(const nn::ModelConfig& cfg, int size = 16, const GradCheckOptions& options = {});

/// Weights with every tensor drawn from N(0, sigma^2); layer-norm scales are
/// 1 + N(0, sigma^2).
nn::ModelWeights<double> dense_random_weights(const nn::ModelConfig& cfg, std::uint64_t seed, double sigma = 0.2);

}  // namespace hatsr::train
