#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "hatsr/error.hpp"
#include "hatsr/io/raw_image.hpp"
#include "hatsr/io/run_config.hpp"
#include "hatsr/phantom/degrade.hpp"
#include "hatsr/train/dataset.hpp"
#include "hatsr/train/metrics.hpp"
#include "hatsr/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace hatsr;
using doctest::Approx;

namespace {

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("hatsr_unit_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Image2D ramp_image(std::int64_t h, std::int64_t w) {
  Image2D img(h, w);
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x) img(y, x) = static_cast<double>(x + y) / static_cast<double>(h + w);
  return img;
}

train::PairedDataset subjects(int n_subjects, int pairs_each) {
  train::PairedDataset ds;
  for (int s = 0; s < n_subjects; ++s)
    for (int k = 0; k < pairs_each; ++k) {
      train::ImagePair p;
      p.lr = Image2D(4, 4);
      p.hr = Image2D(8, 8);
      p.subject_id = "s" + std::to_string(s);
      p.knee_side = k % 2 ? "L" : "R";
      ds.pairs.push_back(p);
    }
  return ds;
}

}  // namespace

TEST_CASE("image metrics") {
  const auto a = ramp_image(16, 16);
  CHECK(train::mse_loss(a, a) == 0.0);
  CHECK(train::psnr(a, a) == std::numeric_limits<double>::infinity());
  CHECK(train::ssim(a, a) == Approx(1.0));
  auto b = a;
  for (auto& v : b.data) v += 0.1;
  CHECK(train::mse_loss(a, b) == Approx(0.01));
  CHECK(train::psnr(a, b) == Approx(20.0));
  CHECK(train::ssim(a, b) < 1.0);
  CHECK_THROWS_AS(train::mse_loss(a, ramp_image(8, 16)), InputError);
}

TEST_CASE("normalization and bicubic upscaling") {
  const auto n = normalize_percentile(ramp_image(10, 10));
  double lo = 1, hi = 0;
  for (double v : n.data) lo = std::min(lo, v), hi = std::max(hi, v);
  CHECK(lo == 0.0);
  CHECK(hi == 1.0);
  for (double v : normalize_percentile(Image2D(4, 4, 1.0, 0.3)).data) CHECK(v == 0.0);

  // Sample-aligned: even output pixels reproduce the input exactly, and a
  // linear ramp stays linear away from the clamped border.
  const auto img = ramp_image(8, 8);
  const auto up = bicubic_upscale(img, 2);
  CHECK(up.height == 16);
  for (std::int64_t y = 0; y < 8; ++y)
    for (std::int64_t x = 0; x < 8; ++x) CHECK(up(2 * y, 2 * x) == Approx(img(y, x)).epsilon(1e-12));
  CHECK(up(5, 5) == Approx((2.5 + 2.5) / 16).epsilon(1e-12));
}

TEST_CASE("step schedule") {
  train::StepSchedule s;
  CHECK(s.at(0, 100) == Approx(2e-4));
  CHECK(s.at(49, 100) == Approx(2e-4));
  CHECK(s.at(50, 100) == Approx(1e-4));
  CHECK(s.at(75, 100) == Approx(5e-5));
  CHECK(s.at(99, 100) == Approx(5e-5));
}

TEST_CASE("train config validation") {
  const auto model = nn::toy_config();
  train::TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate(model));
  cfg.steps = 0;
  CHECK_THROWS_AS(cfg.validate(model), ConfigError);
  cfg = {};
  cfg.patch_size = 2;
  CHECK_THROWS_AS(cfg.validate(model), ConfigError);
}

TEST_CASE("short training run is deterministic and lowers the loss") {
  const auto ds = phantom::make_paired_dataset(2, phantom::default_knee_spec(32), {2, 0.0, false}, 3, 0.0);
  train::TrainConfig cfg;
  cfg.patch_size = 8;
  cfg.batch_size = 2;
  cfg.steps = 30;
  cfg.schedule.base = 2e-3;
  cfg.log_every = 10;
  const auto a = train::train(ds, nn::toy_config(), cfg);
  const auto b = train::train(ds, nn::toy_config(), cfg);
  CHECK(a.report.final_train_mse < a.report.initial_train_mse);
  CHECK(train::to_text(a.report) == train::to_text(b.report));
  CHECK(a.report.loss.size() == 3);
  CHECK(a.weights.all_finite());

  auto diverge = cfg;
  diverge.schedule.base = 1e12;
  CHECK_THROWS_AS(train::train(ds, nn::toy_config(), diverge), NumericalError);
}

TEST_CASE("subject-disjoint split") {
  auto ds = subjects(6, 2);
  ds.pairs[4].surgical_reference = true;  // subject s2
  train::SplitPolicy policy;
  policy.train_count = 6;
  policy.seed = 1;
  const auto out = train::split_dataset(ds, policy);
  CHECK(out.indices(train::Split::kTrain).size() == 6);
  CHECK(out.indices(train::Split::kTest).size() == 6);
  for (const auto& p : out.pairs) {
    for (const auto& q : out.pairs)
      if (p.subject_id == q.subject_id) CHECK(p.split == q.split);
    if (p.subject_id == "s2") CHECK(p.split == train::Split::kTest);
  }

  policy.train_count = 5;  // odd count with two pairs per subject
  CHECK_THROWS_AS(train::split_dataset(ds, policy), ConfigError);
  policy.train_count = std::nullopt;
  policy.train_fraction = 0.5;
  CHECK(train::split_dataset(ds, policy).indices(train::Split::kTrain).size() == 6);
}

TEST_CASE("raw image and dataset round trip") {
  const auto dir = temp_dir("io");
  auto img = ramp_image(5, 7);
  img.pixel_spacing = 0.8;
  io::write_raw_image(dir / "a.raw", img);
  const auto back = io::read_raw_image(dir / "a.raw");
  CHECK(back.height == 5);
  CHECK(back.width == 7);
  CHECK(back.pixel_spacing == Approx(0.8));
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(back.data[i] == Approx(img.data[i]).epsilon(1e-7));

  fs::resize_file(dir / "a.raw", 12);
  CHECK_THROWS_AS(io::read_raw_image(dir / "a.raw"), InputError);
  CHECK_THROWS_AS(io::read_raw_image(dir / "missing.raw"), InputError);

  const auto ds = phantom::make_paired_dataset(2, phantom::default_knee_spec(16), {2, 0.01, false}, 5);
  train::save_dataset(dir / "ds", ds);
  const auto loaded = train::load_dataset(dir / "ds");
  REQUIRE(loaded.pairs.size() == 2);
  CHECK(loaded.scale == 2);
  CHECK(loaded.pairs[1].subject_id == ds.pairs[1].subject_id);
  CHECK(loaded.pairs[1].knee_side == ds.pairs[1].knee_side);
  CHECK(loaded.pairs[1].hr.height == 16);
  CHECK_THROWS_AS(train::load_dataset(dir / "nowhere"), InputError);
  fs::remove_all(dir);
}

TEST_CASE("run config parsing") {
  const auto cfg = io::parse_run_config(R"({
    "seed": 9,
    "model": {"feat_channels": 8, "num_rhag": 1, "habs_per_rhag": 1, "window_size": 4, "num_heads": 2,
              "cbam_reduction": 4},
    "train": {"steps": 5, "decay_points": [0.8]},
    "split": {"train_count": null, "train_fraction": 0.25},
    "degrade": {"truncation_factor": 4},
    "stats": {"weighting": "quadratic"}
  })");
  CHECK(cfg.seed == 9);
  CHECK(cfg.model.feat_channels == 8);
  CHECK(cfg.train.steps == 5);
  CHECK(cfg.train.schedule.decay_points == std::vector<double>{0.8});
  CHECK_FALSE(cfg.split.train_count.has_value());
  CHECK(cfg.degrade.truncation_factor == 4);
  CHECK(cfg.stats.weighting == stats::Weighting::kQuadratic);

  const auto again = io::parse_run_config(io::to_json_string(cfg));
  CHECK(io::to_json_string(again) == io::to_json_string(cfg));

  CHECK_THROWS_AS(io::parse_run_config(R"({"train": {"stepz": 5}})"), ConfigError);
  CHECK_THROWS_AS(io::parse_run_config(R"({"extra": 1})"), ConfigError);
  CHECK_THROWS_AS(io::parse_run_config("{not json"), ConfigError);
  CHECK_THROWS_AS(io::parse_run_config(R"({"phantom": {"n": 0}})").validate(), ConfigError);
}
