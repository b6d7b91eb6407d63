#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "hatsr/nn/config.hpp"
#include "hatsr/phantom/degrade.hpp"
#include "hatsr/stats/agreement.hpp"
#include "hatsr/train/dataset.hpp"
#include "hatsr/train/trainer.hpp"

namespace hatsr::io {

struct PhantomSection {
  int n = 4;
  int size = 384;
  double lesion_prob = 0.5;
  double edge_width = 1.0;
  double texture_amplitude = 0.02;

  /// Knee template at `size` with the edge and texture overrides applied.
  phantom::PhantomSpec base_spec() const;
};

struct StatsSection {
  stats::Weighting weighting = stats::Weighting::kLinear;
  int bootstrap_n = 2000;
};

/// One document for every command. Sections: model, train, split, phantom,
/// degrade, stats, plus a top-level seed that seeds every stage.
struct RunConfig {
  std::uint64_t seed = 0;
  nn::ModelConfig model;
  train::TrainConfig train;
  train::SplitPolicy split;
  PhantomSection phantom;
  phantom::DegradationConfig degrade;
  StatsSection stats;

  /// Throws ConfigError when any section is invalid.
  void validate() const;
};

/// Unknown keys anywhere are rejected with ConfigError; absent keys keep
/// their defaults.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string to_json_string(const RunConfig& cfg);
/// Writes `resolved_config.json` into `dir`.
void write_resolved_config(const std::filesystem::path& dir, const RunConfig& cfg);

}  // namespace hatsr::io
