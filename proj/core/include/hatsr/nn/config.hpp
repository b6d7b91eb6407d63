#pragma once

#include <string>

namespace hatsr::nn {

/// Architecture hyperparameters. Defaults: 144 channels, 6 groups of 6
/// hybrid attention blocks, CBAM weight 0.01, 2x upscaling.
struct ModelConfig {
  int in_channels = 1;
  int feat_channels = 144;
  int num_rhag = 6;
  int habs_per_rhag = 6;
  int window_size = 16;
  int num_heads = 6;
  double mlp_ratio = 2.0;
  double cbam_weight = 0.01;
  int cbam_reduction = 16;
  int cbam_spatial_kernel = 7;
  double ocab_overlap = 0.5;
  int upscale = 2;

  /// Throws ConfigError on inconsistent values.
  void validate() const;

  int head_dim() const { return feat_channels / num_heads; }
  int mlp_hidden() const;
  int cbam_hidden() const;
  /// Key/value window of the overlapping cross-attention: window * (1 + overlap).
  int overlap_window() const;
  /// Channels entering the final reconstruction layer after pixel shuffle.
  int shuffled_channels() const { return feat_channels / (upscale * upscale); }

  bool operator==(const ModelConfig&) const = default;
};

/// Small configuration used for gradient checks and desk-scale training:
/// 8 channels, one group with one block, window 4.
ModelConfig toy_config();

std::string to_json_string(const ModelConfig& cfg);
/// Unknown keys are rejected; missing keys keep their defaults.
ModelConfig model_config_from_json_string(const std::string& text);

}  // namespace hatsr::nn
