#include "hatsr/nn/config.hpp"

#include <cmath>

#include "../json_support.hpp"
#include "hatsr/error.hpp"

namespace hatsr::nn {

namespace {

void check(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("model config: " + what);
}

}  // namespace

int ModelConfig::mlp_hidden() const {
  return std::max(1, static_cast<int>(std::lround(feat_channels * mlp_ratio)));
}

int ModelConfig::cbam_hidden() const { return std::max(1, feat_channels / cbam_reduction); }

int ModelConfig::overlap_window() const {
  return window_size + static_cast<int>(window_size * ocab_overlap);
}

void ModelConfig::validate() const {
  check(in_channels >= 1, "in_channels must be >= 1");
  check(feat_channels >= 1, "feat_channels must be >= 1");
  check(num_heads >= 1 && feat_channels % num_heads == 0, "feat_channels must be divisible by num_heads");
  check(num_rhag >= 1, "num_rhag must be >= 1");
  check(habs_per_rhag >= 0, "habs_per_rhag must be >= 0");
  check(window_size >= 1, "window_size must be >= 1");
  check(mlp_ratio > 0, "mlp_ratio must be positive");
  check(cbam_weight >= 0, "cbam_weight must be >= 0");
  check(cbam_reduction >= 1 && feat_channels >= cbam_reduction, "feat_channels must be >= cbam_reduction");
  check(cbam_spatial_kernel >= 1 && cbam_spatial_kernel % 2 == 1, "cbam_spatial_kernel must be odd");
  check(ocab_overlap >= 0 && ocab_overlap < 1, "ocab_overlap must lie in [0, 1)");
  check((overlap_window() - window_size) % 2 == 0, "window_size * ocab_overlap must be an even pixel count");
  check(upscale >= 1, "upscale must be >= 1");
  check(feat_channels % (upscale * upscale) == 0, "feat_channels must be divisible by upscale^2 for pixel shuffle");
}

ModelConfig toy_config() {
  ModelConfig cfg;
  cfg.feat_channels = 8;
  cfg.num_rhag = 1;
  cfg.habs_per_rhag = 1;
  cfg.window_size = 4;
  cfg.num_heads = 2;
  cfg.cbam_reduction = 4;
  cfg.cbam_spatial_kernel = 3;
  return cfg;
}

std::string to_json_string(const ModelConfig& cfg) { return detail::model_config_to_json(cfg).dump(2); }

ModelConfig model_config_from_json_string(const std::string& text) {
  detail::json j;
  try {
    j = detail::json::parse(text);
  } catch (const detail::json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  return detail::model_config_from_json(j);
}

}  // namespace hatsr::nn

namespace hatsr::detail {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

json model_config_to_json(const nn::ModelConfig& c) {
  return json{{"in_channels", c.in_channels},
              {"feat_channels", c.feat_channels},
              {"num_rhag", c.num_rhag},
              {"habs_per_rhag", c.habs_per_rhag},
              {"window_size", c.window_size},
              {"num_heads", c.num_heads},
              {"mlp_ratio", c.mlp_ratio},
              {"cbam_weight", c.cbam_weight},
              {"cbam_reduction", c.cbam_reduction},
              {"cbam_spatial_kernel", c.cbam_spatial_kernel},
              {"ocab_overlap", c.ocab_overlap},
              {"upscale", c.upscale}};
}

nn::ModelConfig model_config_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"in_channels", "feat_channels", "num_rhag", "habs_per_rhag", "window_size", "num_heads",
                       "mlp_ratio", "cbam_weight", "cbam_reduction", "cbam_spatial_kernel", "ocab_overlap", "upscale"},
                      "model");
  nn::ModelConfig c;
  read_key(j, "in_channels", c.in_channels);
  read_key(j, "feat_channels", c.feat_channels);
  read_key(j, "num_rhag", c.num_rhag);
  read_key(j, "habs_per_rhag", c.habs_per_rhag);
  read_key(j, "window_size", c.window_size);
  read_key(j, "num_heads", c.num_heads);
  read_key(j, "mlp_ratio", c.mlp_ratio);
  read_key(j, "cbam_weight", c.cbam_weight);
  read_key(j, "cbam_reduction", c.cbam_reduction);
  read_key(j, "cbam_spatial_kernel", c.cbam_spatial_kernel);
  read_key(j, "ocab_overlap", c.ocab_overlap);
  read_key(j, "upscale", c.upscale);
  c.validate();
  return c;
}

}  // namespace hatsr::detail
