#pragma once

#include <vector>

#include "hatsr/autograd.hpp"

// Differentiable operations over [B,H,W,C] feature maps. "Last-axis" ops
// (linear, layer_norm, concat) treat any tensor as rows of its final extent.
namespace hatsr::ag {

template <typename T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> sub(const Var<T>& a, const Var<T>& b);
/// a + s * b
template <typename T> Var<T> add_scaled(const Var<T>& a, const Var<T>& b, T s);
template <typename T> Var<T> mul(const Var<T>& a, const Var<T>& b);

/// x[B,...,C] * gate[B,C], gate broadcast over the spatial axes.
template <typename T> Var<T> mul_channel_gate(const Var<T>& x, const Var<T>& gate);
/// x[B,H,W,C] * gate[B,H,W,1], gate broadcast over channels.
template <typename T> Var<T> mul_spatial_gate(const Var<T>& x, const Var<T>& gate);

template <typename T> Var<T> sigmoid(const Var<T>& x);
template <typename T> Var<T> relu(const Var<T>& x);
/// Exact (erf) GELU.
template <typename T> Var<T> gelu(const Var<T>& x);

/// x[..., Cin] @ w[Cin, Cout] + b[Cout]
template <typename T> Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& b);
/// Normalizes each row over the last axis, then scales by gamma and shifts by beta.
template <typename T> Var<T> layer_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps = T(1e-5));

/// Same-padded (zero) stride-1 convolution. x[B,H,W,Cin], w[K,K,Cin,Cout], b[Cout], K odd.
template <typename T> Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b);

template <typename T> Var<T> concat_channels(const std::vector<Var<T>>& parts);

/// [B,H,W,C] -> [B,C]
template <typename T> Var<T> global_avg_pool(const Var<T>& x);
template <typename T> Var<T> global_max_pool(const Var<T>& x);
/// [B,H,W,C] -> [B,H,W,1]
template <typename T> Var<T> channel_mean(const Var<T>& x);
template <typename T> Var<T> channel_max(const Var<T>& x);

/// Reflect padding at the bottom and right edges.
template <typename T> Var<T> reflect_pad(const Var<T>& x, std::int64_t pad_bottom, std::int64_t pad_right);
/// Keeps the top-left height x width region.
template <typename T> Var<T> crop(const Var<T>& x, std::int64_t height, std::int64_t width);

template <typename T> Var<T> pixel_shuffle(const Var<T>& x, int scale);

/// Mean of squared differences (scalar).
template <typename T> Var<T> mse(const Var<T>& pred, const Var<T>& target);
template <typename T> Var<T> sum(const Var<T>& x);

/// Mirror index for reflect padding without edge repetition; handles pads
/// longer than the extent by folding repeatedly.
std::int64_t reflect_index(std::int64_t i, std::int64_t n);

}  // namespace hatsr::ag
