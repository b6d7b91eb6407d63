#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "hatsr/error.hpp"
#include "hatsr/nn/network.hpp"
#include "hatsr/nn/weights.hpp"

namespace fs = std::filesystem;
using namespace hatsr;

namespace {

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("hatsr_unit_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("model config validation") {
  nn::ModelConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.head_dim() == 24);
  CHECK(cfg.overlap_window() == 24);

  auto bad = cfg;
  bad.num_heads = 7;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.upscale = 5;  // 144 channels do not split into 25 sub-pixels
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.window_size = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("model config json round trip and unknown keys") {
  auto cfg = nn::toy_config();
  cfg.cbam_weight = 0.05;
  CHECK(nn::model_config_from_json_string(nn::to_json_string(cfg)) == cfg);
  CHECK_THROWS_AS(nn::model_config_from_json_string(R"({"channels": 8})"), ConfigError);
}

TEST_CASE("parameter manifest names are unique and sized") {
  const auto cfg = nn::toy_config();
  const auto manifest = nn::parameter_manifest(cfg);
  std::set<std::string> names;
  for (const auto& p : manifest) {
    CHECK(names.insert(p.name).second);
    CHECK(shape_numel(p.shape) > 0);
  }
  const nn::ModelWeights<float> w(cfg);
  CHECK(w.size() == manifest.size());
  CHECK_THROWS_AS(w.at("no.such.param"), ConfigError);
}

TEST_CASE("initialization is seeded and finite") {
  const auto cfg = nn::toy_config();
  const auto a = nn::initialize_weights<float>(cfg, 3);
  const auto b = nn::initialize_weights<float>(cfg, 3);
  const auto c = nn::initialize_weights<float>(cfg, 4);
  CHECK(a.all_finite());
  bool same = true, differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    same &= a[i].tensor == b[i].tensor;
    differs |= !(a[i].tensor == c[i].tensor);
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("padded extent covers a window multiple and the overlap window") {
  auto cfg = nn::toy_config();
  CHECK(nn::padded_extent(16, cfg) == 16);
  CHECK(nn::padded_extent(17, cfg) == 20);
  CHECK(nn::padded_extent(3, cfg) >= cfg.overlap_window());
  CHECK(nn::padded_extent(3, cfg) % cfg.window_size == 0);
}

TEST_CASE("forward produces upscaled output for arbitrary extents") {
  const auto cfg = nn::toy_config();
  const auto w = nn::initialize_weights<double>(cfg, 1);
  for (auto [h, wd] : {std::pair{8, 8}, std::pair{7, 13}, std::pair{5, 3}}) {
    Tensor<double> x({2, h, wd, 1}, 0.3);
    const auto y = nn::super_resolve(w, x);
    CHECK(y.shape() == Shape{2, 2 * h, 2 * wd, 1});
    bool finite = true;
    for (double v : y.values()) finite &= std::isfinite(v);
    CHECK(finite);
  }
}

TEST_CASE("forward rejects non-finite pixels") {
  const auto w = nn::initialize_weights<double>(nn::toy_config(), 1);
  Image2D img(8, 8, 1.0, 0.5);
  img(3, 3) = std::nan("");
  CHECK_THROWS_AS(nn::super_resolve(w, img), InputError);
}

TEST_CASE("float and double forward passes agree") {
  const auto wd = nn::initialize_weights<double>(nn::toy_config(), 2);
  const auto wf = wd.cast<float>();
  Image2D img(12, 12);
  for (std::int64_t i = 0; i < 12; ++i)
    for (std::int64_t j = 0; j < 12; ++j) img(i, j) = 0.5 + 0.4 * std::sin(0.7 * i + 0.3 * j);
  const auto a = nn::super_resolve(wd, img);
  const auto b = nn::super_resolve(wf, img);
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.data[i] - b.data[i]));
  CHECK(worst < 1e-4);
}

TEST_CASE("weights archive round trip") {
  const auto dir = temp_dir("weights");
  const auto w = nn::initialize_weights<float>(nn::toy_config(), 9);
  nn::save_weights(dir / "w.bin", w);
  const auto r = nn::load_weights(dir / "w.bin");
  CHECK(r.config() == w.config());
  REQUIRE(r.size() == w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(r[i].name == w[i].name);
    CHECK(r[i].tensor == w[i].tensor);
  }

  CHECK_THROWS_AS(nn::load_weights(dir / "missing.bin"), InputError);

  {
    std::ofstream bad(dir / "magic.bin", std::ios::binary);
    bad << "NOTHATSR........";
  }
  CHECK_THROWS_AS(nn::load_weights(dir / "magic.bin"), InputError);

  // Truncated payload.
  const auto full = fs::file_size(dir / "w.bin");
  fs::copy_file(dir / "w.bin", dir / "short.bin");
  fs::resize_file(dir / "short.bin", full - 16);
  CHECK_THROWS_AS(nn::load_weights(dir / "short.bin"), InputError);
  fs::remove_all(dir);
}
