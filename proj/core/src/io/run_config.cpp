#include "hatsr/io/run_config.hpp"

#include <fstream>
#include <sstream>

#include "../json_support.hpp"

namespace hatsr::io {

using detail::json;
using detail::read_key;
using detail::reject_unknown_keys;

namespace {

const char* weighting_name(stats::Weighting w) {
  switch (w) {
    case stats::Weighting::kIdentity: return "identity";
    case stats::Weighting::kLinear: return "linear";
    case stats::Weighting::kQuadratic: return "quadratic";
  }
  return "linear";
}

stats::Weighting parse_weighting(const std::string& s) {
  if (s == "identity" || s == "none") return stats::Weighting::kIdentity;
  if (s == "linear") return stats::Weighting::kLinear;
  if (s == "quadratic") return stats::Weighting::kQuadratic;
  throw ConfigError("stats.weighting must be identity, linear or quadratic, got '" + s + "'");
}

const json& section(const json& root, const char* name) {
  static const json empty = json::object();
  if (!root.contains(name)) return empty;
  const auto& s = root.at(name);
  if (!s.is_object()) throw ConfigError(std::string("config section '") + name + "' must be an object");
  return s;
}

}  // namespace

phantom::PhantomSpec PhantomSection::base_spec() const {
  auto spec = phantom::default_knee_spec(size);
  spec.edge_width = edge_width;
  spec.texture_amplitude = texture_amplitude;
  return spec;
}

void RunConfig::validate() const {
  model.validate();
  train.validate(model);
  degrade.validate();
  if (phantom.n < 1) throw ConfigError("phantom.n must be >= 1");
  if (phantom.size < 8) throw ConfigError("phantom.size must be >= 8");
  if (!(phantom.lesion_prob >= 0 && phantom.lesion_prob <= 1)) throw ConfigError("phantom.lesion_prob outside [0,1]");
  phantom.base_spec().validate();
  if (split.train_count && *split.train_count < 0) throw ConfigError("split.train_count must be >= 0");
  if (!(split.train_fraction >= 0 && split.train_fraction <= 1)) throw ConfigError("split.train_fraction outside [0,1]");
  if (stats.bootstrap_n < 0) throw ConfigError("stats.bootstrap_n must be >= 0");
}

RunConfig parse_run_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown_keys(root, {"seed", "model", "train", "split", "phantom", "degrade", "stats"}, "config");

  RunConfig c;
  read_key(root, "seed", c.seed);
  if (root.contains("model")) c.model = detail::model_config_from_json(section(root, "model"));

  const auto& t = section(root, "train");
  reject_unknown_keys(t,
                      {"patch_size", "batch_size", "steps", "step_size", "decay_points", "decay_factor", "seed",
                       "augment", "normalize", "log_every", "beta1", "beta2", "adam_eps"},
                      "train");
  c.train.seed = c.seed;
  read_key(t, "patch_size", c.train.patch_size);
  read_key(t, "batch_size", c.train.batch_size);
  read_key(t, "steps", c.train.steps);
  read_key(t, "step_size", c.train.schedule.base);
  read_key(t, "decay_points", c.train.schedule.decay_points);
  read_key(t, "decay_factor", c.train.schedule.factor);
  read_key(t, "seed", c.train.seed);
  read_key(t, "augment", c.train.augment);
  read_key(t, "normalize", c.train.normalize);
  read_key(t, "log_every", c.train.log_every);
  read_key(t, "beta1", c.train.beta1);
  read_key(t, "beta2", c.train.beta2);
  read_key(t, "adam_eps", c.train.adam_eps);

  const auto& sp = section(root, "split");
  reject_unknown_keys(sp, {"train_count", "train_fraction", "seed"}, "split");
  c.split.seed = c.seed;
  if (sp.contains("train_count")) {
    if (sp.at("train_count").is_null()) {
      c.split.train_count.reset();
    } else {
      int v = 0;
      read_key(sp, "train_count", v);
      c.split.train_count = v;
    }
  }
  read_key(sp, "train_fraction", c.split.train_fraction);
  read_key(sp, "seed", c.split.seed);

  const auto& ph = section(root, "phantom");
  reject_unknown_keys(ph, {"n", "size", "lesion_prob", "edge_width", "texture_amplitude"}, "phantom");
  read_key(ph, "n", c.phantom.n);
  read_key(ph, "size", c.phantom.size);
  read_key(ph, "lesion_prob", c.phantom.lesion_prob);
  read_key(ph, "edge_width", c.phantom.edge_width);
  read_key(ph, "texture_amplitude", c.phantom.texture_amplitude);

  const auto& dg = section(root, "degrade");
  reject_unknown_keys(dg, {"truncation_factor", "noise_sigma", "keep_grid"}, "degrade");
  read_key(dg, "truncation_factor", c.degrade.truncation_factor);
  read_key(dg, "noise_sigma", c.degrade.noise_sigma);
  read_key(dg, "keep_grid", c.degrade.keep_grid);

  const auto& st = section(root, "stats");
  reject_unknown_keys(st, {"weighting", "bootstrap_n"}, "stats");
  std::string w = weighting_name(c.stats.weighting);
  read_key(st, "weighting", w);
  c.stats.weighting = parse_weighting(w);
  read_key(st, "bootstrap_n", c.stats.bootstrap_n);

  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string to_json_string(const RunConfig& c) {
  json split = {{"train_fraction", c.split.train_fraction}, {"seed", c.split.seed}};
  split["train_count"] = c.split.train_count ? json(*c.split.train_count) : json(nullptr);
  const json root = {
      {"seed", c.seed},
      {"model", detail::model_config_to_json(c.model)},
      {"train",
       {{"patch_size", c.train.patch_size},
        {"batch_size", c.train.batch_size},
        {"steps", c.train.steps},
        {"step_size", c.train.schedule.base},
        {"decay_points", c.train.schedule.decay_points},
        {"decay_factor", c.train.schedule.factor},
        {"seed", c.train.seed},
        {"augment", c.train.augment},
        {"normalize", c.train.normalize},
        {"log_every", c.train.log_every},
        {"beta1", c.train.beta1},
        {"beta2", c.train.beta2},
        {"adam_eps", c.train.adam_eps}}},
      {"split", split},
      {"phantom",
       {{"n", c.phantom.n},
        {"size", c.phantom.size},
        {"lesion_prob", c.phantom.lesion_prob},
        {"edge_width", c.phantom.edge_width},
        {"texture_amplitude", c.phantom.texture_amplitude}}},
      {"degrade",
       {{"truncation_factor", c.degrade.truncation_factor},
        {"noise_sigma", c.degrade.noise_sigma},
        {"keep_grid", c.degrade.keep_grid}}},
      {"stats", {{"weighting", weighting_name(c.stats.weighting)}, {"bootstrap_n", c.stats.bootstrap_n}}},
  };
  return root.dump(2) + "\n";
}

void write_resolved_config(const std::filesystem::path& dir, const RunConfig& cfg) {
  const auto path = dir / "resolved_config.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << to_json_string(cfg);
  if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace hatsr::io
