#pragma once

#include "hatsr/image.hpp"
#include "hatsr/nn/layers.hpp"

namespace hatsr::nn {

/// F_0 = inception(I_LR): [B,H,W,C_in] -> [B,H,W,C].
template <typename T>
Var<T> shallow_extract(Scope<T>& s, const Var<T>& image);

/// F_DF = inception(RHAG_N(...RHAG_1(F_0))).
template <typename T>
Var<T> deep_extract(Scope<T>& s, const Var<T>& f0);

/// I_SR = inception(pixel_shuffle(inception(F_0 + F_DF))): [B,H,W,C] -> [B,sH,sW,C_in].
template <typename T>
Var<T> reconstruct(Scope<T>& s, const Var<T>& f0, const Var<T>& fdf);

/// Full pipeline on [B,H,W,C_in]. Reflect-pads to a window multiple (at least
/// one overlap window) before feature extraction and crops the output back to
/// [B,sH,sW,C_in]. Throws InputError on non-finite pixels.
template <typename T>
Var<T> forward(Scope<T>& s, const Var<T>& image);

/// Extent after padding for an input extent under `cfg`.
std::int64_t padded_extent(std::int64_t extent, const ModelConfig& cfg);

/// Inference without gradient bookkeeping.
template <typename T>
Tensor<T> super_resolve(const ModelWeights<T>& weights, const Tensor<T>& images);
template <typename T>
Image2D super_resolve(const ModelWeights<T>& weights, const Image2D& image);

}  // namespace hatsr::nn
