#include "hatsr/nn/weights.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "../json_support.hpp"
#include "hatsr/error.hpp"

namespace hatsr::nn {

namespace {

constexpr char kMagic[8] = {'H', 'A', 'T', 'S', 'R', 'W', '0', '1'};

void add_linear(std::vector<ParamSpec>& out, const std::string& p, std::int64_t in, std::int64_t o, bool zero_out) {
  out.push_back({p + ".weight", {in, o}, zero_out ? InitKind::kZero : InitKind::kProjection});
  out.push_back({p + ".bias", {o}, InitKind::kZero});
}

void add_norm(std::vector<ParamSpec>& out, const std::string& p, std::int64_t c) {
  out.push_back({p + ".weight", {c}, InitKind::kOne});
  out.push_back({p + ".bias", {c}, InitKind::kZero});
}

void add_inception(std::vector<ParamSpec>& out, const std::string& p, std::int64_t in, std::int64_t o,
                   bool zero_out) {
  const std::int64_t branch = std::max(in, o);
  for (int k : {1, 3, 5}) {
    const std::string b = p + ".b" + std::to_string(k);
    out.push_back({b + ".weight", {k, k, in, branch}, InitKind::kConv});
    out.push_back({b + ".bias", {branch}, InitKind::kZero});
  }
  out.push_back({p + ".fuse.weight", {1, 1, 3 * branch, o}, zero_out ? InitKind::kZero : InitKind::kConv});
  out.push_back({p + ".fuse.bias", {o}, InitKind::kZero});
}

void add_mlp(std::vector<ParamSpec>& out, const std::string& p, const ModelConfig& cfg) {
  add_linear(out, p + ".fc1", cfg.feat_channels, cfg.mlp_hidden(), false);
  add_linear(out, p + ".fc2", cfg.mlp_hidden(), cfg.feat_channels, true);
}

template <typename T>
T truncated_normal(std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> dist(0.0, 1.0);
  double v;
  do {
    v = dist(rng);
  } while (std::abs(v) > 2.0);
  return static_cast<T>(v * sigma);
}

void write_u64_le(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64_le(std::istream& is) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) throw InputError("weights archive truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<ParamSpec> parameter_manifest(const ModelConfig& cfg) {
  cfg.validate();
  const std::int64_t C = cfg.feat_channels;
  const std::int64_t heads = cfg.num_heads;
  const std::int64_t w = cfg.window_size;
  const std::int64_t ow = cfg.overlap_window();
  std::vector<ParamSpec> out;
  add_inception(out, "shallow", cfg.in_channels, C, false);
  for (int i = 0; i < cfg.num_rhag; ++i) {
    const std::string group = "layers." + std::to_string(i);
    for (int j = 0; j < cfg.habs_per_rhag; ++j) {
      const std::string blk = group + ".blocks." + std::to_string(j);
      add_norm(out, blk + ".norm1", C);
      add_linear(out, blk + ".attn.qkv", C, 3 * C, false);
      out.push_back({blk + ".attn.relative_bias", {(2 * w - 1) * (2 * w - 1), heads}, InitKind::kProjection});
      add_linear(out, blk + ".attn.proj", C, C, true);
      add_linear(out, blk + ".cbam.fc1", C, cfg.cbam_hidden(), false);
      add_linear(out, blk + ".cbam.fc2", cfg.cbam_hidden(), C, false);
      const std::int64_t k = cfg.cbam_spatial_kernel;
      out.push_back({blk + ".cbam.spatial.weight", {k, k, 2, 1}, InitKind::kConv});
      out.push_back({blk + ".cbam.spatial.bias", {1}, InitKind::kZero});
      add_norm(out, blk + ".norm2", C);
      add_mlp(out, blk + ".mlp", cfg);
    }
    const std::string ocab = group + ".ocab";
    add_norm(out, ocab + ".norm1", C);
    add_linear(out, ocab + ".qkv", C, 3 * C, false);
    out.push_back({ocab + ".relative_bias", {(w + ow - 1) * (w + ow - 1), heads}, InitKind::kProjection});
    add_linear(out, ocab + ".proj", C, C, true);
    add_norm(out, ocab + ".norm2", C);
    add_mlp(out, ocab + ".mlp", cfg);
    add_inception(out, group + ".conv", C, C, true);
  }
  add_inception(out, "deep.conv", C, C, false);
  add_inception(out, "recon.pre", C, C, false);
  add_inception(out, "recon.post", cfg.shuffled_channels(), cfg.in_channels, false);
  return out;
}

template <typename T>
ModelWeights<T>::ModelWeights(const ModelConfig& cfg) : config_(cfg) {
  for (auto& spec : parameter_manifest(cfg)) {
    if (!index_.emplace(spec.name, entries_.size()).second) {
      throw ConfigError("duplicate parameter name in manifest: " + spec.name);
    }
    entries_.push_back({spec.name, Tensor<T>(spec.shape)});
  }
}

template <typename T>
std::optional<std::size_t> ModelWeights<T>::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

template <typename T>
Tensor<T>& ModelWeights<T>::at(const std::string& name) {
  auto i = find(name);
  if (!i) throw ConfigError("unknown parameter: " + name);
  return entries_[*i].tensor;
}

template <typename T>
const Tensor<T>& ModelWeights<T>::at(const std::string& name) const {
  auto i = find(name);
  if (!i) throw ConfigError("unknown parameter: " + name);
  return entries_[*i].tensor;
}

template <typename T>
std::size_t ModelWeights<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.size();
  return n;
}

template <typename T>
bool ModelWeights<T>::all_finite() const {
  for (const auto& e : entries_)
    for (T v : e.tensor.values())
      if (!std::isfinite(v)) return false;
  return true;
}

template <typename T>
void ModelWeights<T>::fill(T value) {
  for (auto& e : entries_) e.tensor.fill(value);
}

template <typename T>
ModelWeights<T> initialize_weights(const ModelConfig& cfg, std::uint64_t seed) {
  const auto manifest = parameter_manifest(cfg);
  ModelWeights<T> w(cfg);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    auto& t = w[i].tensor;
    const auto& shape = manifest[i].shape;
    switch (manifest[i].init) {
      case InitKind::kZero:
        t.fill(T(0));
        break;
      case InitKind::kOne:
        t.fill(T(1));
        break;
      case InitKind::kProjection:
        for (auto& v : t.values()) v = truncated_normal<T>(rng, 0.02);
        break;
      case InitKind::kConv: {
        const double fan_in = static_cast<double>(shape[0] * shape[1] * shape[2]);
        const double sigma = 1.0 / std::sqrt(fan_in);
        for (auto& v : t.values()) v = truncated_normal<T>(rng, sigma);
        break;
      }
    }
  }
  return w;
}

void save_weights(const std::filesystem::path& path, const ModelWeights<float>& weights) {
  detail::json header;
  header["format"] = "hatsr-weights";
  header["version"] = 1;
  header["dtype"] = "float32";
  header["byte_order"] = "little";
  header["config"] = detail::model_config_to_json(weights.config());
  auto& tensors = header["tensors"] = detail::json::array();
  std::uint64_t offset = 0;
  for (const auto& e : weights) {
    tensors.push_back({{"name", e.name}, {"shape", e.tensor.shape()}, {"offset", offset}});
    offset += e.tensor.size() * sizeof(float);
  }
  const std::string text = header.dump();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError("cannot open weights archive for writing: " + path.string());
  os.write(kMagic, sizeof kMagic);
  write_u64_le(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  std::vector<unsigned char> buf;
  for (const auto& e : weights) {
    buf.resize(e.tensor.size() * 4);
    for (std::size_t i = 0; i < e.tensor.size(); ++i) {
      const auto bits = std::bit_cast<std::uint32_t>(e.tensor[i]);
      for (int k = 0; k < 4; ++k) buf[4 * i + k] = static_cast<unsigned char>(bits >> (8 * k));
    }
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  }
  if (!os) throw InputError("failed writing weights archive: " + path.string());
}

namespace {

ModelWeights<float> read_archive(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open weights archive: " + path.string());
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw InputError("not a weights archive (bad magic): " + path.string());
  }
  const std::uint64_t header_len = read_u64_le(is);
  if (header_len > (1u << 26)) throw InputError("weights archive header too large");
  std::string text(header_len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(header_len))) throw InputError("weights archive truncated");
  detail::json header;
  try {
    header = detail::json::parse(text);
  } catch (const detail::json::exception& e) {
    throw InputError(std::string("weights archive header: ") + e.what());
  }
  ModelConfig cfg;
  try {
    cfg = detail::model_config_from_json(header.at("config"));
  } catch (const detail::json::exception& e) {
    throw InputError(std::string("weights archive header: ") + e.what());
  } catch (const ConfigError& e) {
    throw InputError(std::string("weights archive header: ") + e.what());
  }
  ModelWeights<float> w(cfg);
  const auto& tensors = header.at("tensors");
  if (!tensors.is_array() || tensors.size() != w.size()) {
    throw InputError("weights archive manifest does not match its configuration");
  }
  const auto data_start = static_cast<std::uint64_t>(is.tellg());
  std::vector<unsigned char> buf;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto& t = tensors[i];
    const auto name = t.at("name").get<std::string>();
    const auto shape = t.at("shape").get<Shape>();
    if (name != w[i].name || shape != w[i].tensor.shape()) {
      throw InputError("weights archive manifest mismatch at '" + name + "' (expected '" + w[i].name + "' " +
                       shape_string(w[i].tensor.shape()) + ")");
    }
    is.seekg(static_cast<std::streamoff>(data_start + t.at("offset").get<std::uint64_t>()));
    buf.resize(w[i].tensor.size() * 4);
    if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
      throw InputError("weights archive truncated in tensor '" + name + "'");
    }
    for (std::size_t k = 0; k < w[i].tensor.size(); ++k) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(buf[4 * k + b]) << (8 * b);
      w[i].tensor[k] = std::bit_cast<float>(bits);
    }
  }
  if (!w.all_finite()) throw InputError("weights archive contains non-finite parameters");
  return w;
}

}  // namespace

ModelWeights<float> load_weights(const std::filesystem::path& path) {
  try {
    return read_archive(path);
  } catch (const detail::json::exception& e) {
    throw InputError("weights archive header: " + std::string(e.what()));
  }
}

template class ModelWeights<float>;
template class ModelWeights<double>;
template ModelWeights<float> initialize_weights(const ModelConfig&, std::uint64_t);
template ModelWeights<double> initialize_weights(const ModelConfig&, std::uint64_t);

}  // namespace hatsr::nn
