#pragma once

#include <string>
#include <vector>

#include "hatsr/autograd.hpp"
#include "hatsr/nn/weights.hpp"

namespace hatsr::nn {

using ag::Var;

/// Binds the parameters of one ModelWeights into a Graph on first use.
/// With `trainable`, bound parameters are gradient leaves.
template <typename T>
class Scope {
 public:
  Scope(ag::Graph<T>& graph, const ModelWeights<T>& weights, bool trainable = false);

  const ModelConfig& config() const { return weights_.config(); }
  ag::Graph<T>& graph() { return graph_; }
  const Var<T>& param(const std::string& name);

  /// Gradients of every parameter in manifest order; zero for parameters the
  /// forward pass never touched.
  ModelWeights<T> gradients() const;

 private:
  ag::Graph<T>& graph_;
  const ModelWeights<T>& weights_;
  bool trainable_;
  std::vector<Var<T>> bound_;
};

/// fuse(concat(conv1x1(x), conv3x3(x), conv5x5(x))), all same-padded.
template <typename T>
Var<T> inception_conv(Scope<T>& s, const std::string& prefix, const Var<T>& x);

/// qkv projection, (shifted) window attention with relative-position bias,
/// output projection. The shift is window/2 when `shifted` and the map is
/// larger than one window.
template <typename T>
Var<T> window_msa(Scope<T>& s, const std::string& prefix, const Var<T>& x, bool shifted);

/// Channel gate from a shared MLP over global average- and max-pooled
/// descriptors, then a spatial gate from a k x k convolution over the
/// channelwise mean/max maps of the channel-gated input.
template <typename T>
Var<T> cbam(Scope<T>& s, const std::string& prefix, const Var<T>& x);

template <typename T>
Var<T> mlp(Scope<T>& s, const std::string& prefix, const Var<T>& x);

/// Hybrid attention block:
///   X_N = LN(X); X_M = (S)W-MSA(X_N) + alpha * CBAM(X_N) + X; Y = MLP(LN(X_M)) + X_M
template <typename T>
Var<T> hab_forward(Scope<T>& s, const std::string& prefix, const Var<T>& x, bool shifted);

/// Overlapping cross-attention block with the HAB residual/MLP wrapping and
/// no CBAM term.
template <typename T>
Var<T> ocab_forward(Scope<T>& s, const std::string& prefix, const Var<T>& x);

/// Residual hybrid attention group `index`: alternating unshifted/shifted
/// HABs, one OCAB, one inception convolution, plus the group residual.
template <typename T>
Var<T> rhag_forward(Scope<T>& s, int index, const Var<T>& x);

}  // namespace hatsr::nn
