#include "hatsr/attention.hpp"

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <memory>

#include "hatsr/error.hpp"

namespace hatsr::ag {

namespace {

template <typename T>
using MatR = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Token positions and bias indices shared by every window of one layer.
struct Layout {
  std::int64_t B = 0, H = 0, W = 0, C = 0;
  int heads = 0, head_dim = 0;
  int window = 0;
  int key_window = 0;  // == window for self-attention
  int shift = 0;
  bool cross = false;
  std::int64_t windows_y = 0, windows_x = 0;
  int n = 0, m = 0;  // queries / keys per window
  std::int64_t table_rows = 0;
  std::vector<int> bias_index;  // n*m

  std::int64_t windows() const { return windows_y * windows_x; }

  // Image position of query token q in window (wy, wx).
  std::pair<std::int64_t, std::int64_t> query_pos(std::int64_t wy, std::int64_t wx, int q) const {
    std::int64_t y = wy * window + q / window, x = wx * window + q % window;
    if (shift) {
      y = (y + shift) % H;
      x = (x + shift) % W;
    }
    return {y, x};
  }

  // Image position of key token k; returns false when it falls outside the map.
  bool key_pos(std::int64_t wy, std::int64_t wx, int k, std::int64_t& y, std::int64_t& x) const {
    if (!cross) {
      std::tie(y, x) = query_pos(wy, wx, k);
      return true;
    }
    const int pad = (key_window - window) / 2;
    y = wy * window - pad + k / key_window;
    x = wx * window - pad + k % key_window;
    return y >= 0 && y < H && x >= 0 && x < W;
  }

  int region(std::int64_t rolled, std::int64_t extent) const {
    if (rolled < extent - window) return 0;
    if (rolled < extent - shift) return 1;
    return 2;
  }

  // Shifted windows mask pairs from different regions of the unrolled map.
  bool masked(std::int64_t wy, std::int64_t wx, int q, int k) const {
    if (!shift) return false;
    const std::int64_t qy = wy * window + q / window, qx = wx * window + q % window;
    const std::int64_t ky = wy * window + k / window, kx = wx * window + k % window;
    return region(qy, H) != region(ky, H) || region(qx, W) != region(kx, W);
  }
};

template <typename T>
Layout make_layout(const Tensor<T>& qkv, const Tensor<T>& table, int heads, int window, int key_window, int shift,
                   bool cross) {
  if (qkv.rank() != 4) throw InputError("attention expects qkv as [B,H,W,3C], got " + shape_string(qkv.shape()));
  Layout L;
  L.B = qkv.dim(0);
  L.H = qkv.dim(1);
  L.W = qkv.dim(2);
  if (qkv.dim(3) % 3 != 0) throw ConfigError("attention: qkv channels not divisible by 3");
  L.C = qkv.dim(3) / 3;
  if (heads < 1 || L.C % heads != 0) {
    throw ConfigError("attention: " + std::to_string(L.C) + " channels not divisible by " + std::to_string(heads) +
                      " heads");
  }
  if (window < 1 || window > L.H || window > L.W) {
    throw ConfigError("attention: window " + std::to_string(window) + " larger than feature extent " +
                      std::to_string(L.H) + "x" + std::to_string(L.W));
  }
  if (L.H % window != 0 || L.W % window != 0) {
    throw ConfigError("attention: window " + std::to_string(window) + " does not divide feature extent " +
                      std::to_string(L.H) + "x" + std::to_string(L.W));
  }
  if (cross) {
    if (key_window < window || (key_window - window) % 2 != 0) {
      throw ConfigError("overlap attention: key window " + std::to_string(key_window) +
                        " must be >= query window and differ from it by an even count");
    }
    if (key_window > L.H || key_window > L.W) {
      throw ConfigError("overlap attention: key window " + std::to_string(key_window) +
                        " exceeds padded feature extent");
    }
  }
  if (shift < 0 || shift >= window) throw ConfigError("attention: shift must lie in [0, window)");
  L.heads = heads;
  L.head_dim = static_cast<int>(L.C / heads);
  L.window = window;
  L.key_window = cross ? key_window : window;
  L.shift = cross ? 0 : shift;
  L.cross = cross;
  L.windows_y = L.H / window;
  L.windows_x = L.W / window;
  L.n = window * window;
  L.m = L.key_window * L.key_window;
  const int span = window + L.key_window - 1;
  L.table_rows = static_cast<std::int64_t>(span) * span;
  if (table.rank() != 2 || table.dim(0) != L.table_rows || table.dim(1) != heads) {
    throw ConfigError("attention: bias table " + shape_string(table.shape()) + " expected [" +
                      std::to_string(L.table_rows) + "," + std::to_string(heads) + "]");
  }
  L.bias_index.resize(static_cast<std::size_t>(L.n) * L.m);
  for (int q = 0; q < L.n; ++q)
    for (int k = 0; k < L.m; ++k) {
      const int dy = q / window - k / L.key_window + L.key_window - 1;
      const int dx = q % window - k % L.key_window + L.key_window - 1;
      L.bias_index[static_cast<std::size_t>(q) * L.m + k] = dy * span + dx;
    }
  return L;
}

template <typename T>
struct Saved {
  Layout layout;
  AlignedVector<T> probs;  // [B, windows, heads, n, m]
};

template <typename T>
Tensor<T> attention_forward(const Tensor<T>& qkv, const Tensor<T>& table, const Layout& L, AlignedVector<T>& probs,
                            bool keep_probs) {
  const int n = L.n, m = L.m, d = L.head_dim;
  const std::int64_t C3 = 3 * L.C;
  const T scale = T(1) / std::sqrt(T(d));
  Tensor<T> out({L.B, L.H, L.W, L.C});
  const std::size_t per_head = static_cast<std::size_t>(n) * m;
  probs.assign(keep_probs ? static_cast<std::size_t>(L.B * L.windows() * L.heads) * per_head : per_head, T(0));
  MatR<T> Q(n, d), K(m, d), V(m, d), S(n, m), O(n, d);
  std::vector<std::int64_t> qoff(static_cast<std::size_t>(n)), koff(static_cast<std::size_t>(m));
  std::vector<char> kvalid(static_cast<std::size_t>(m));
  for (std::int64_t b = 0; b < L.B; ++b)
    for (std::int64_t wy = 0; wy < L.windows_y; ++wy)
      for (std::int64_t wx = 0; wx < L.windows_x; ++wx) {
        const std::int64_t widx = wy * L.windows_x + wx;
        for (int q = 0; q < n; ++q) {
          auto [y, x] = L.query_pos(wy, wx, q);
          qoff[q] = ((b * L.H + y) * L.W + x) * C3;
        }
        for (int k = 0; k < m; ++k) {
          std::int64_t y, x;
          kvalid[k] = L.key_pos(wy, wx, k, y, x);
          koff[k] = kvalid[k] ? ((b * L.H + y) * L.W + x) * C3 : -1;
        }
        for (int h = 0; h < L.heads; ++h) {
          const std::int64_t ch = static_cast<std::int64_t>(h) * d;
          for (int q = 0; q < n; ++q)
            for (int c = 0; c < d; ++c) Q(q, c) = qkv[qoff[q] + ch + c];
          for (int k = 0; k < m; ++k)
            for (int c = 0; c < d; ++c) {
              K(k, c) = kvalid[k] ? qkv[koff[k] + L.C + ch + c] : T(0);
              V(k, c) = kvalid[k] ? qkv[koff[k] + 2 * L.C + ch + c] : T(0);
            }
          S.noalias() = Q * K.transpose();
          T* P = keep_probs ? probs.data() + (((b * L.windows() + widx) * L.heads + h) * n) * m : probs.data();
          for (int q = 0; q < n; ++q) {
            T mx = -std::numeric_limits<T>::infinity();
            for (int k = 0; k < m; ++k) {
              T s = L.masked(wy, wx, q, k) ? -std::numeric_limits<T>::infinity()
                                           : S(q, k) * scale + table[L.bias_index[q * m + k] * L.heads + h];
              S(q, k) = s;
              if (s > mx) mx = s;
            }
            T z = 0;
            for (int k = 0; k < m; ++k) {
              const T e = std::exp(S(q, k) - mx);
              P[q * m + k] = e;
              z += e;
            }
            for (int k = 0; k < m; ++k) P[q * m + k] /= z;
          }
          O.noalias() = Eigen::Map<const MatR<T>>(P, n, m) * V;
          for (int q = 0; q < n; ++q) {
            T* dst = out.data() + qoff[q] / 3 + ch;
            for (int c = 0; c < d; ++c) dst[c] = O(q, c);
          }
        }
      }
  return out;
}

template <typename T>
void attention_backward(Node<T>& node, const Saved<T>& saved) {
  const Layout& L = saved.layout;
  const int n = L.n, m = L.m, d = L.head_dim;
  const std::int64_t C3 = 3 * L.C;
  const T scale = T(1) / std::sqrt(T(d));
  const auto& qkv = node.parents[0]->value;
  const bool want_qkv = node.parents[0]->requires_grad;
  const bool want_table = node.parents[1]->requires_grad;
  Tensor<T>* gqkv = want_qkv ? &node.parents[0]->grad_buffer() : nullptr;
  Tensor<T>* gtable = want_table ? &node.parents[1]->grad_buffer() : nullptr;
  MatR<T> Q(n, d), K(m, d), V(m, d), dO(n, d), dP(n, m), dS(n, m), dQ(n, d), dK(m, d), dV(m, d);
  std::vector<std::int64_t> qoff(static_cast<std::size_t>(n)), koff(static_cast<std::size_t>(m));
  std::vector<char> kvalid(static_cast<std::size_t>(m));
  for (std::int64_t b = 0; b < L.B; ++b)
    for (std::int64_t wy = 0; wy < L.windows_y; ++wy)
      for (std::int64_t wx = 0; wx < L.windows_x; ++wx) {
        const std::int64_t widx = wy * L.windows_x + wx;
        for (int q = 0; q < n; ++q) {
          auto [y, x] = L.query_pos(wy, wx, q);
          qoff[q] = ((b * L.H + y) * L.W + x) * C3;
        }
        for (int k = 0; k < m; ++k) {
          std::int64_t y, x;
          kvalid[k] = L.key_pos(wy, wx, k, y, x);
          koff[k] = kvalid[k] ? ((b * L.H + y) * L.W + x) * C3 : -1;
        }
        for (int h = 0; h < L.heads; ++h) {
          const std::int64_t ch = static_cast<std::int64_t>(h) * d;
          for (int q = 0; q < n; ++q)
            for (int c = 0; c < d; ++c) {
              Q(q, c) = qkv[qoff[q] + ch + c];
              dO(q, c) = node.grad[qoff[q] / 3 + ch + c];
            }
          for (int k = 0; k < m; ++k)
            for (int c = 0; c < d; ++c) {
              K(k, c) = kvalid[k] ? qkv[koff[k] + L.C + ch + c] : T(0);
              V(k, c) = kvalid[k] ? qkv[koff[k] + 2 * L.C + ch + c] : T(0);
            }
          Eigen::Map<const MatR<T>> P(saved.probs.data() + (((b * L.windows() + widx) * L.heads + h) * n) * m, n, m);
          dV.noalias() = P.transpose() * dO;
          dP.noalias() = dO * V.transpose();
          for (int q = 0; q < n; ++q) {
            T dot = 0;
            for (int k = 0; k < m; ++k) dot += dP(q, k) * P(q, k);
            for (int k = 0; k < m; ++k) dS(q, k) = P(q, k) * (dP(q, k) - dot);
          }
          if (gtable) {
            for (int q = 0; q < n; ++q)
              for (int k = 0; k < m; ++k) (*gtable)[L.bias_index[q * m + k] * L.heads + h] += dS(q, k);
          }
          if (!gqkv) continue;
          dQ.noalias() = scale * dS * K;
          dK.noalias() = scale * dS.transpose() * Q;
          for (int q = 0; q < n; ++q)
            for (int c = 0; c < d; ++c) (*gqkv)[qoff[q] + ch + c] += dQ(q, c);
          for (int k = 0; k < m; ++k) {
            if (!kvalid[k]) continue;
            for (int c = 0; c < d; ++c) {
              (*gqkv)[koff[k] + L.C + ch + c] += dK(k, c);
              (*gqkv)[koff[k] + 2 * L.C + ch + c] += dV(k, c);
            }
          }
        }
      }
}

template <typename T>
Var<T> attention_op(const Var<T>& qkv, const Var<T>& table, Layout layout) {
  auto saved = std::make_shared<Saved<T>>();
  saved->layout = std::move(layout);
  const bool keep = qkv.graph().recording() && (qkv.requires_grad() || table.requires_grad());
  Tensor<T> out = attention_forward(qkv.value(), table.value(), saved->layout, saved->probs, keep);
  if (!keep) saved->probs = {};
  return qkv.graph().make(std::move(out), {qkv, table}, [saved](Node<T>& n) { attention_backward(n, *saved); });
}

template <typename T>
Tensor<T> probs_tensor(const Tensor<T>& qkv, const Tensor<T>& table, const Layout& L) {
  AlignedVector<T> probs;
  attention_forward(qkv, table, L, probs, true);
  return Tensor<T>({L.B, L.windows(), L.heads, L.n, L.m}, std::move(probs));
}

}  // namespace

template <typename T>
Var<T> window_attention(const Var<T>& qkv, const Var<T>& bias_table, int heads, int window, int shift) {
  return attention_op(qkv, bias_table, make_layout(qkv.value(), bias_table.value(), heads, window, window, shift, false));
}

template <typename T>
Var<T> overlap_cross_attention(const Var<T>& qkv, const Var<T>& bias_table, int heads, int window,
                               int overlap_window) {
  return attention_op(qkv, bias_table,
                      make_layout(qkv.value(), bias_table.value(), heads, window, overlap_window, 0, true));
}

template <typename T>
Tensor<T> window_attention_probs(const Tensor<T>& qkv, const Tensor<T>& bias_table, int heads, int window, int shift) {
  return probs_tensor(qkv, bias_table, make_layout(qkv, bias_table, heads, window, window, shift, false));
}

template <typename T>
Tensor<T> overlap_attention_probs(const Tensor<T>& qkv, const Tensor<T>& bias_table, int heads, int window,
                                  int overlap_window) {
  return probs_tensor(qkv, bias_table, make_layout(qkv, bias_table, heads, window, overlap_window, 0, true));
}

template Var<float> window_attention(const Var<float>&, const Var<float>&, int, int, int);
template Var<double> window_attention(const Var<double>&, const Var<double>&, int, int, int);
template Var<float> overlap_cross_attention(const Var<float>&, const Var<float>&, int, int, int);
template Var<double> overlap_cross_attention(const Var<double>&, const Var<double>&, int, int, int);
template Tensor<float> window_attention_probs(const Tensor<float>&, const Tensor<float>&, int, int, int);
template Tensor<double> window_attention_probs(const Tensor<double>&, const Tensor<double>&, int, int, int);
template Tensor<float> overlap_attention_probs(const Tensor<float>&, const Tensor<float>&, int, int, int);
template Tensor<double> overlap_attention_probs(const Tensor<double>&, const Tensor<double>&, int, int, int);

}  // namespace hatsr::ag
