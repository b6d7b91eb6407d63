#pragma once

#include "hatsr/autograd.hpp"

namespace hatsr::ag {

/// Window multi-head self-attention over a projected qkv map.
///
/// qkv is [B,H,W,3C] laid out as [q | k | v], each C = heads * head_dim with
/// head h owning channels [h*head_dim, (h+1)*head_dim). bias_table is
/// [(2w-1)^2, heads], indexed by the query-minus-key offset inside a window.
/// A nonzero shift cyclically rolls the map by -shift before partitioning and
/// masks token pairs that originate from different regions of the unrolled
/// map. H and W must be multiples of `window`. Returns [B,H,W,C].
template <typename T>
Var<T> window_attention(const Var<T>& qkv, const Var<T>& bias_table, int heads, int window, int shift);

/// Overlapping cross-attention: queries from non-overlapping w x w windows,
/// keys/values from the centered ow x ow window around each (zero outside the
/// map). bias_table is [(w+ow-1)^2, heads]. With ow == w this is exactly
/// window_attention with shift 0.
template <typename T>
Var<T> overlap_cross_attention(const Var<T>& qkv, const Var<T>& bias_table, int heads, int window,
                               int overlap_window);

/// Attention probabilities [B, windows, heads, queries, keys] for inspection.
template <typename T>
Tensor<T> window_attention_probs(const Tensor<T>& qkv, const Tensor<T>& bias_table, int heads, int window, int shift);
template <typename T>
Tensor<T> overlap_attention_probs(const Tensor<T>& qkv, const Tensor<T>& bias_table, int heads, int window,
                                  int overlap_window);

}  // namespace hatsr::ag
