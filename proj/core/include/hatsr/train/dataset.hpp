#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hatsr/image.hpp"

namespace hatsr::train {

enum class Split { kUnassigned, kTrain, kTest };

const char* split_name(Split s);

struct ImagePair {
  Image2D lr;
  Image2D hr;
  std::string subject_id;
  std::string knee_side;  // "L" or "R"
  bool surgical_reference = false;
  Split split = Split::kUnassigned;
};

/// LR/HR pairs with HR extents = scale x LR extents.
struct PairedDataset {
  std::vector<ImagePair> pairs;
  int scale = 2;

  /// Throws InputError when a pair violates the extent relationship or a
  /// subject id is missing.
  void validate() const;
  std::vector<std::size_t> indices(Split split) const;
};

/// Either an absolute train count (24 of 54 at full scale) or a fraction of
/// all pairs when train_count is unset.
struct SplitPolicy {
  std::optional<int> train_count = 24;
  double train_fraction = 24.0 / 54.0;
  std::uint64_t seed = 0;
};

/// Subject-disjoint train/test assignment. Every pair of a subject with any
/// surgical-reference pair goes to test. Throws ConfigError when the
/// requested train count cannot be met exactly.
PairedDataset split_dataset(PairedDataset dataset, const SplitPolicy& policy);

/// Directory layout: manifest.json plus <id>_lr.raw / <id>_hr.raw images with
/// sidecars.
void save_dataset(const std::filesystem::path& dir, const PairedDataset& dataset);
PairedDataset load_dataset(const std::filesystem::path& dir);

}  // namespace hatsr::train
