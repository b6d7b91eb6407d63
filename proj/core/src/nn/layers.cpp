#include "hatsr/nn/layers.hpp"

#include <algorithm>

#include "hatsr/attention.hpp"
#include "hatsr/error.hpp"
#include "hatsr/ops.hpp"

namespace hatsr::nn {

template <typename T>
Scope<T>::Scope(ag::Graph<T>& graph, const ModelWeights<T>& weights, bool trainable)
    : graph_(graph), weights_(weights), trainable_(trainable), bound_(weights.size()) {}

template <typename T>
const Var<T>& Scope<T>::param(const std::string& name) {
  const auto idx = weights_.find(name);
  if (!idx) throw ConfigError("network references unknown parameter '" + name + "'");
  auto& slot = bound_[*idx];
  if (!slot) {
    const auto& t = weights_[*idx].tensor;
    slot = trainable_ ? graph_.variable(t) : graph_.constant(t);
  }
  return slot;
}

template <typename T>
ModelWeights<T> Scope<T>::gradients() const {
  ModelWeights<T> g(weights_.config());
  for (std::size_t i = 0; i < bound_.size(); ++i) {
    if (bound_[i] && bound_[i].grad().size() == g[i].tensor.size()) g[i].tensor = bound_[i].grad();
  }
  return g;
}

template <typename T>
Var<T> inception_conv(Scope<T>& s, const std::string& prefix, const Var<T>& x) {
  std::vector<Var<T>> branches;
  branches.reserve(3);
  for (const char* k : {".b1", ".b3", ".b5"}) {
    branches.push_back(ag::conv2d(x, s.param(prefix + k + ".weight"), s.param(prefix + k + ".bias")));
  }
  return ag::conv2d(ag::concat_channels(branches), s.param(prefix + ".fuse.weight"), s.param(prefix + ".fuse.bias"));
}

template <typename T>
Var<T> window_msa(Scope<T>& s, const std::string& prefix, const Var<T>& x, bool shifted) {
  const auto& cfg = s.config();
  const int w = cfg.window_size;
  const int shift = (shifted && std::min(x.dim(1), x.dim(2)) > w) ? w / 2 : 0;
  auto qkv = ag::linear(x, s.param(prefix + ".qkv.weight"), s.param(prefix + ".qkv.bias"));
  auto att = ag::window_attention(qkv, s.param(prefix + ".relative_bias"), cfg.num_heads, w, shift);
  return ag::linear(att, s.param(prefix + ".proj.weight"), s.param(prefix + ".proj.bias"));
}

template <typename T>
Var<T> cbam(Scope<T>& s, const std::string& prefix, const Var<T>& x) {
  auto shared_mlp = [&](const Var<T>& v) {
    auto h = ag::relu(ag::linear(v, s.param(prefix + ".fc1.weight"), s.param(prefix + ".fc1.bias")));
    return ag::linear(h, s.param(prefix + ".fc2.weight"), s.param(prefix + ".fc2.bias"));
  };
  auto channel_gate = ag::sigmoid(ag::add(shared_mlp(ag::global_avg_pool(x)), shared_mlp(ag::global_max_pool(x))));
  auto xc = ag::mul_channel_gate(x, channel_gate);
  auto pooled = ag::concat_channels(std::vector<Var<T>>{ag::channel_mean(xc), ag::channel_max(xc)});
  auto spatial_gate =
      ag::sigmoid(ag::conv2d(pooled, s.param(prefix + ".spatial.weight"), s.param(prefix + ".spatial.bias")));
  return ag::mul_spatial_gate(xc, spatial_gate);
}

template <typename T>
Var<T> mlp(Scope<T>& s, const std::string& prefix, const Var<T>& x) {
  auto h = ag::gelu(ag::linear(x, s.param(prefix + ".fc1.weight"), s.param(prefix + ".fc1.bias")));
  return ag::linear(h, s.param(prefix + ".fc2.weight"), s.param(prefix + ".fc2.bias"));
}

namespace {

template <typename T>
Var<T> norm(Scope<T>& s, const std::string& prefix, const Var<T>& x) {
  return ag::layer_norm(x, s.param(prefix + ".weight"), s.param(prefix + ".bias"));
}

}  // namespace

template <typename T>
Var<T> hab_forward(Scope<T>& s, const std::string& prefix, const Var<T>& x, bool shifted) {
  const auto xn = norm(s, prefix + ".norm1", x);
  const auto attn = window_msa(s, prefix + ".attn", xn, shifted);
  const auto gated = cbam(s, prefix + ".cbam", xn);
  const auto xm = ag::add(ag::add_scaled(attn, gated, static_cast<T>(s.config().cbam_weight)), x);
  return ag::add(mlp(s, prefix + ".mlp", norm(s, prefix + ".norm2", xm)), xm);
}

template <typename T>
Var<T> ocab_forward(Scope<T>& s, const std::string& prefix, const Var<T>& x) {
  const auto& cfg = s.config();
  const auto xn = norm(s, prefix + ".norm1", x);
  auto qkv = ag::linear(xn, s.param(prefix + ".qkv.weight"), s.param(prefix + ".qkv.bias"));
  auto att = ag::overlap_cross_attention(qkv, s.param(prefix + ".relative_bias"), cfg.num_heads, cfg.window_size,
                                         cfg.overlap_window());
  const auto xm = ag::add(ag::linear(att, s.param(prefix + ".proj.weight"), s.param(prefix + ".proj.bias")), x);
  return ag::add(mlp(s, prefix + ".mlp", norm(s, prefix + ".norm2", xm)), xm);
}

template <typename T>
Var<T> rhag_forward(Scope<T>& s, int index, const Var<T>& x) {
  const std::string group = "layers." + std::to_string(index);
  Var<T> h = x;
  for (int j = 0; j < s.config().habs_per_rhag; ++j) {
    h = hab_forward(s, group + ".blocks." + std::to_string(j), h, j % 2 == 1);
  }
  h = ocab_forward(s, group + ".ocab", h);
  return ag::add(inception_conv(s, group + ".conv", h), x);
}

#define HATSR_INSTANTIATE_LAYERS(T)                                                        \
  template class Scope<T>;                                                                 \
  template Var<T> inception_conv(Scope<T>&, const std::string&, const Var<T>&);            \
  template Var<T> window_msa(Scope<T>&, const std::string&, const Var<T>&, bool);          \
  template Var<T> cbam(Scope<T>&, const std::string&, const Var<T>&);                      \
  template Var<T> mlp(Scope<T>&, const std::string&, const Var<T>&);                       \
  template Var<T> hab_forward(Scope<T>&, const std::string&, const Var<T>&, bool);         \
  template Var<T> ocab_forward(Scope<T>&, const std::string&, const Var<T>&);              \
  template Var<T> rhag_forward(Scope<T>&, int, const Var<T>&);

HATSR_INSTANTIATE_LAYERS(float)
HATSR_INSTANTIATE_LAYERS(double)

}  // namespace hatsr::nn
