#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "hatsr/nn/config.hpp"
#include "hatsr/nn/weights.hpp"
#include "hatsr/train/dataset.hpp"

namespace hatsr::train {

/// Piecewise-constant step size: base, multiplied by `factor` at each decay
/// point (fractions of the total step count).
struct StepSchedule {
  double base = 2e-4;
  std::vector<double> decay_points = {0.5, 0.75};
  double factor = 0.5;

  double at(int step, int total_steps) const;  // step is 0-based
};

struct TrainConfig {
  int patch_size = 64;  // LR pixels
  int batch_size = 4;
  int steps = 1000;
  StepSchedule schedule;
  std::uint64_t seed = 0;
  bool augment = false;    // random flips and 90 degree rotations
  bool normalize = true;   // percentile clip, then rescale to [0, 1]
  int log_every = 10;
  double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

  /// Throws ConfigError unless steps > 0, batch_size > 0, log_every > 0 and
  /// patch_size >= the model window.
  void validate(const nn::ModelConfig& model) const;
};

struct LossRecord {
  int step = 0;  // 1-based
  double mse = 0;
  double step_size = 0;
};

struct PairEval {
  std::string subject_id;
  double psnr_sr = 0, psnr_bicubic = 0;
  double ssim_sr = 0, ssim_bicubic = 0;
  double mse_sr = 0, mse_bicubic = 0;
};

struct EvalReport {
  std::vector<PairEval> pairs;
  double mean_psnr_sr() const;
  double mean_psnr_bicubic() const;
  double mean_ssim_sr() const;
  double mean_ssim_bicubic() const;
  double mean_mse_sr() const;
};

struct TrainReport {
  std::vector<LossRecord> loss;
  /// Full-image MSE over the training pairs before the first and after the
  /// last update.
  double initial_train_mse = 0, final_train_mse = 0;
  EvalReport eval;  // test split; empty when there is none
  double seconds = 0;  // wall time; not part of to_text, which stays deterministic
};

/// Tab-separated sections: one record per logged step, then per-pair
/// evaluation with means.
std::string to_text(const TrainReport& report);
void write_report(const std::filesystem::path& path, const TrainReport& report);

struct TrainResult {
  nn::ModelWeights<float> weights;
  TrainReport report;
};

using ProgressFn = std::function<void(const LossRecord&)>;

/// Adam on MSE over random LR patches and their aligned s x HR patches. Uses
/// the train split, or every pair when nothing is assigned. Deterministic
/// for a given seed. Throws NumericalError on a non-finite loss.
TrainResult train(const PairedDataset& dataset, const nn::ModelConfig& model, const TrainConfig& cfg,
                  const ProgressFn& progress = {});

/// Same, starting from the given weights.
TrainResult train(const PairedDataset& dataset, nn::ModelWeights<float> init, const TrainConfig& cfg,
                  const ProgressFn& progress = {});

/// PSNR/SSIM of the network and of bicubic upscaling against HR, per pair.
EvalReport evaluate(const nn::ModelWeights<float>& weights, const PairedDataset& dataset,
                    const std::vector<std::size_t>& indices, bool normalize = true);

/// Applies the training-time intensity normalization to both images of a pair.
ImagePair prepare_pair(const ImagePair& pair, bool normalize);

}  // namespace hatsr::train
