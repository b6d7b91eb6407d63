#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hatsr/nn/config.hpp"
#include "hatsr/tensor.hpp"

namespace hatsr::nn {

enum class InitKind {
  kZero,        // biases and the last layer of each residual branch
  kOne,         // layer-norm scale
  kProjection,  // truncated normal, sigma 0.02
  kConv,        // truncated normal, sigma 1/sqrt(fan_in)
};

struct ParamSpec {
  std::string name;
  Shape shape;
  InitKind init;
};

/// Deterministic parameter-order manifest for a configuration. Every tensor
/// the network reads appears exactly once.
std::vector<ParamSpec> parameter_manifest(const ModelConfig& cfg);

/// All learned parameters of one network, in manifest order.
template <typename T>
class ModelWeights {
 public:
  struct Entry {
    std::string name;
    Tensor<T> tensor;
  };

  ModelWeights() = default;
  /// Zero-filled weights laid out by parameter_manifest(cfg).
  explicit ModelWeights(const ModelConfig& cfg);

  const ModelConfig& config() const { return config_; }
  std::size_t size() const { return entries_.size(); }
  Entry& operator[](std::size_t i) { return entries_[i]; }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  std::optional<std::size_t> find(const std::string& name) const;
  Tensor<T>& at(const std::string& name);
  const Tensor<T>& at(const std::string& name) const;

  std::size_t parameter_count() const;
  bool all_finite() const;
  void fill(T value);

  template <typename U>
  ModelWeights<U> cast() const {
    ModelWeights<U> out(config_);
    for (std::size_t i = 0; i < entries_.size(); ++i) out[i].tensor = entries_[i].tensor.template cast<U>();
    return out;
  }

 private:
  ModelConfig config_;
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Truncated-normal projections, fan-in scaled convolutions, zero biases,
/// and zero final layers on residual branches. Deterministic per seed.
template <typename T>
ModelWeights<T> initialize_weights(const ModelConfig& cfg, std::uint64_t seed);

/// Archive layout: 8-byte magic "HATSRW01", u64 little-endian header length,
/// JSON header {config, tensors: [{name, shape, offset}]}, then every tensor
/// as float32 little-endian in manifest order.
void save_weights(const std::filesystem::path& path, const ModelWeights<float>& weights);
ModelWeights<float> load_weights(const std::filesystem::path& path);

extern template class ModelWeights<float>;
extern template class ModelWeights<double>;

}  // namespace hatsr::nn
