#include "hatsr/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hatsr/error.hpp"

namespace hatsr::ag {

namespace {

template <typename T>
using MatR = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapR = Eigen::Map<MatR<T>>;
template <typename T>
using CMapR = Eigen::Map<const MatR<T>>;

template <typename T>
bool wants(const Node<T>& n, std::size_t i) {
  return n.parents[i]->requires_grad;
}

template <typename T>
Tensor<T>& grad_of(Node<T>& n, std::size_t i) {
  return n.parents[i]->grad_buffer();
}

void require_same_shape(const Shape& a, const Shape& b, const char* op) {
  if (a != b) throw InputError(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " + shape_string(b));
}

template <typename T>
std::int64_t last_extent(const Tensor<T>& t) {
  if (t.rank() == 0) throw InputError("expected a tensor of rank >= 1");
  return t.shape().back();
}

template <typename T, typename F, typename D>
Var<T> unary(const Var<T>& x, F f, D df) {
  const auto& xv = x.value();
  Tensor<T> out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  return x.graph().make(std::move(out), {x}, [df](Node<T>& n) {
    const auto& xv = n.parents[0]->value;
    auto& gx = grad_of(n, 0);
    for (std::size_t i = 0; i < xv.size(); ++i) gx[i] += n.grad[i] * df(xv[i], n.value[i]);
  });
}

}  // namespace

std::int64_t reflect_index(std::int64_t i, std::int64_t n) {
  if (n == 1) return 0;
  const std::int64_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require_same_shape(a.shape(), b.shape(), "add");
  Tensor<T> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return a.graph().make(std::move(out), {a, b}, [](Node<T>& n) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (!wants(n, p)) continue;
      auto& g = grad_of(n, p);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
  });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  return add_scaled(a, b, T(-1));
}

template <typename T>
Var<T> add_scaled(const Var<T>& a, const Var<T>& b, T s) {
  require_same_shape(a.shape(), b.shape(), "add_scaled");
  Tensor<T> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * bv[i];
  return a.graph().make(std::move(out), {a, b}, [s](Node<T>& n) {
    if (wants(n, 0)) {
      auto& g = grad_of(n, 0);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
    if (wants(n, 1)) {
      auto& g = grad_of(n, 1);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * n.grad[i];
    }
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  require_same_shape(a.shape(), b.shape(), "mul");
  Tensor<T> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return a.graph().make(std::move(out), {a, b}, [](Node<T>& n) {
    const auto& av = n.parents[0]->value;
    const auto& bv = n.parents[1]->value;
    if (wants(n, 0)) {
      auto& g = grad_of(n, 0);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * bv[i];
    }
    if (wants(n, 1)) {
      auto& g = grad_of(n, 1);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * av[i];
    }
  });
}

template <typename T>
Var<T> mul_channel_gate(const Var<T>& x, const Var<T>& gate) {
  const auto& xv = x.value();
  const auto& gv = gate.value();
  if (xv.rank() < 2 || gv.rank() != 2 || gv.dim(0) != xv.dim(0) || gv.dim(1) != last_extent(xv)) {
    throw InputError("mul_channel_gate: gate " + shape_string(gv.shape()) + " incompatible with " +
                     shape_string(xv.shape()));
  }
  const std::int64_t B = xv.dim(0), C = gv.dim(1);
  const std::int64_t S = static_cast<std::int64_t>(xv.size()) / (B * C);
  Tensor<T> out(xv.shape());
  for (std::int64_t b = 0; b < B; ++b)
    for (std::int64_t s = 0; s < S; ++s)
      for (std::int64_t c = 0; c < C; ++c) {
        const auto i = static_cast<std::size_t>((b * S + s) * C + c);
        out[i] = xv[i] * gv[static_cast<std::size_t>(b * C + c)];
      }
  return x.graph().make(std::move(out), {x, gate}, [B, S, C](Node<T>& n) {
    const auto& xv = n.parents[0]->value;
    const auto& gv = n.parents[1]->value;
    const bool gx_on = wants(n, 0), gg_on = wants(n, 1);
    for (std::int64_t b = 0; b < B; ++b)
      for (std::int64_t s = 0; s < S; ++s)
        for (std::int64_t c = 0; c < C; ++c) {
          const auto i = static_cast<std::size_t>((b * S + s) * C + c);
          const auto gi = static_cast<std::size_t>(b * C + c);
          if (gx_on) grad_of(n, 0)[i] += n.grad[i] * gv[gi];
          if (gg_on) grad_of(n, 1)[gi] += n.grad[i] * xv[i];
        }
  });
}

template <typename T>
Var<T> mul_spatial_gate(const Var<T>& x, const Var<T>& gate) {
  const auto& xv = x.value();
  const auto& gv = gate.value();
  if (xv.rank() != 4 || gv.rank() != 4 || gv.dim(3) != 1 || gv.dim(0) != xv.dim(0) || gv.dim(1) != xv.dim(1) ||
      gv.dim(2) != xv.dim(2)) {
    throw InputError("mul_spatial_gate: gate " + shape_string(gv.shape()) + " incompatible with " +
                     shape_string(xv.shape()));
  }
  const std::int64_t P = xv.dim(0) * xv.dim(1) * xv.dim(2), C = xv.dim(3);
  Tensor<T> out(xv.shape());
  for (std::int64_t p = 0; p < P; ++p)
    for (std::int64_t c = 0; c < C; ++c) {
      const auto i = static_cast<std::size_t>(p * C + c);
      out[i] = xv[i] * gv[static_cast<std::size_t>(p)];
    }
  return x.graph().make(std::move(out), {x, gate}, [P, C](Node<T>& n) {
    const auto& xv = n.parents[0]->value;
    const auto& gv = n.parents[1]->value;
    const bool gx_on = wants(n, 0), gg_on = wants(n, 1);
    for (std::int64_t p = 0; p < P; ++p)
      for (std::int64_t c = 0; c < C; ++c) {
        const auto i = static_cast<std::size_t>(p * C + c);
        if (gx_on) grad_of(n, 0)[i] += n.grad[i] * gv[static_cast<std::size_t>(p)];
        if (gg_on) grad_of(n, 1)[static_cast<std::size_t>(p)] += n.grad[i] * xv[i];
      }
  });
}

template <typename T>
Var<T> sigmoid(const Var<T>& x) {
  return unary(
      x, [](T v) { return T(1) / (T(1) + std::exp(-v)); }, [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Var<T> relu(const Var<T>& x) {
  return unary(
      x, [](T v) { return v > T(0) ? v : T(0); }, [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <typename T>
Var<T> gelu(const Var<T>& x) {
  constexpr T inv_sqrt2 = T(1) / std::numbers::sqrt2_v<T>;
  constexpr T inv_sqrt2pi = std::numbers::inv_sqrtpi_v<T> * inv_sqrt2;
  return unary(
      x, [](T v) { return T(0.5) * v * (T(1) + std::erf(v * inv_sqrt2)); },
      [](T v, T) { return T(0.5) * (T(1) + std::erf(v * inv_sqrt2)) + v * inv_sqrt2pi * std::exp(T(-0.5) * v * v); });
}

template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& b) {
  const auto& xv = x.value();
  const auto& wv = w.value();
  const auto& bv = b.value();
  const std::int64_t cin = last_extent(xv);
  if (wv.rank() != 2 || wv.dim(0) != cin || bv.rank() != 1 || bv.dim(0) != wv.dim(1)) {
    throw ConfigError("linear: weight " + shape_string(wv.shape()) + " / bias " + shape_string(bv.shape()) +
                      " incompatible with input " + shape_string(xv.shape()));
  }
  const std::int64_t cout = wv.dim(1);
  const std::int64_t rows = static_cast<std::int64_t>(xv.size()) / std::max<std::int64_t>(cin, 1);
  Shape os = xv.shape();
  os.back() = cout;
  Tensor<T> out(os);
  {
    CMapR<T> X(xv.data(), rows, cin);
    CMapR<T> W(wv.data(), cin, cout);
    MapR<T> Y(out.data(), rows, cout);
    Y.noalias() = X * W;
    Y.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(bv.data(), cout);
  }
  return x.graph().make(std::move(out), {x, w, b}, [rows, cin, cout](Node<T>& n) {
    CMapR<T> G(n.grad.data(), rows, cout);
    if (wants(n, 0)) {
      CMapR<T> W(n.parents[1]->value.data(), cin, cout);
      MapR<T>(grad_of(n, 0).data(), rows, cin).noalias() += G * W.transpose();
    }
    if (wants(n, 1)) {
      CMapR<T> X(n.parents[0]->value.data(), rows, cin);
      MapR<T>(grad_of(n, 1).data(), cin, cout).noalias() += X.transpose() * G;
    }
    if (wants(n, 2)) {
      Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(grad_of(n, 2).data(), cout) += G.colwise().sum();
    }
  });
}

template <typename T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps) {
  const auto& xv = x.value();
  const std::int64_t C = last_extent(xv);
  if (gamma.value().size() != static_cast<std::size_t>(C) || beta.value().size() != static_cast<std::size_t>(C)) {
    throw ConfigError("layer_norm: affine parameters do not match " + std::to_string(C) + " channels");
  }
  const std::int64_t rows = static_cast<std::int64_t>(xv.size()) / C;
  const auto& g = gamma.value();
  const auto& be = beta.value();
  Tensor<T> out(xv.shape());
  std::vector<T> inv_std(static_cast<std::size_t>(rows));
  for (std::int64_t r = 0; r < rows; ++r) {
    const T* row = xv.data() + r * C;
    T mean = 0;
    for (std::int64_t c = 0; c < C; ++c) mean += row[c];
    mean /= T(C);
    T var = 0;
    for (std::int64_t c = 0; c < C; ++c) var += (row[c] - mean) * (row[c] - mean);
    var /= T(C);
    const T inv = T(1) / std::sqrt(var + eps);
    inv_std[static_cast<std::size_t>(r)] = inv;
    T* o = out.data() + r * C;
    for (std::int64_t c = 0; c < C; ++c) o[c] = (row[c] - mean) * inv * g[c] + be[c];
  }
  return x.graph().make(std::move(out), {x, gamma, beta}, [rows, C, inv_std = std::move(inv_std)](Node<T>& n) {
    const auto& xv = n.parents[0]->value;
    const auto& g = n.parents[1]->value;
    std::vector<T> xhat(static_cast<std::size_t>(C)), dxhat(static_cast<std::size_t>(C));
    for (std::int64_t r = 0; r < rows; ++r) {
      const T* row = xv.data() + r * C;
      const T* dy = n.grad.data() + r * C;
      T mean = 0;
      for (std::int64_t c = 0; c < C; ++c) mean += row[c];
      mean /= T(C);
      const T inv = inv_std[static_cast<std::size_t>(r)];
      T m1 = 0, m2 = 0;
      for (std::int64_t c = 0; c < C; ++c) {
        xhat[c] = (row[c] - mean) * inv;
        dxhat[c] = dy[c] * g[c];
        m1 += dxhat[c];
        m2 += dxhat[c] * xhat[c];
      }
      m1 /= T(C);
      m2 /= T(C);
      if (wants(n, 0)) {
        T* dx = grad_of(n, 0).data() + r * C;
        for (std::int64_t c = 0; c < C; ++c) dx[c] += inv * (dxhat[c] - m1 - xhat[c] * m2);
      }
      if (wants(n, 1)) {
        auto& dg = grad_of(n, 1);
        for (std::int64_t c = 0; c < C; ++c) dg[c] += dy[c] * xhat[c];
      }
      if (wants(n, 2)) {
        auto& db = grad_of(n, 2);
        for (std::int64_t c = 0; c < C; ++c) db[c] += dy[c];
      }
    }
  });
}

namespace {

constexpr std::int64_t kConvChunkPixels = 2048;

// Fills col[p, (ky*K + kx)*Cin + c] for pixels [p0, p0 + np) of image b.
template <typename T>
void im2col(const Tensor<T>& x, std::int64_t b, std::int64_t p0, std::int64_t np, int K, T* col) {
  const std::int64_t H = x.dim(1), W = x.dim(2), C = x.dim(3);
  const int r = K / 2;
  const std::int64_t stride = static_cast<std::int64_t>(K) * K * C;
  for (std::int64_t p = 0; p < np; ++p) {
    const std::int64_t y = (p0 + p) / W, xx = (p0 + p) % W;
    T* dst = col + p * stride;
    for (int ky = 0; ky < K; ++ky) {
      const std::int64_t sy = y + ky - r;
      for (int kx = 0; kx < K; ++kx, dst += C) {
        const std::int64_t sx = xx + kx - r;
        if (sy < 0 || sy >= H || sx < 0 || sx >= W) {
          std::fill(dst, dst + C, T(0));
        } else {
          const T* src = &x.at(b, sy, sx, 0);
          std::copy(src, src + C, dst);
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, std::int64_t b, std::int64_t p0, std::int64_t np, int K, Tensor<T>& dx) {
  const std::int64_t H = dx.dim(1), W = dx.dim(2), C = dx.dim(3);
  const int r = K / 2;
  const std::int64_t stride = static_cast<std::int64_t>(K) * K * C;
  for (std::int64_t p = 0; p < np; ++p) {
    const std::int64_t y = (p0 + p) / W, xx = (p0 + p) % W;
    const T* src = col + p * stride;
    for (int ky = 0; ky < K; ++ky) {
      const std::int64_t sy = y + ky - r;
      for (int kx = 0; kx < K; ++kx, src += C) {
        const std::int64_t sx = xx + kx - r;
        if (sy < 0 || sy >= H || sx < 0 || sx >= W) continue;
        T* d = &dx.at(b, sy, sx, 0);
        for (std::int64_t c = 0; c < C; ++c) d[c] += src[c];
      }
    }
  }
}

}  // namespace

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b) {
  const auto& xv = x.value();
  const auto& wv = w.value();
  if (xv.rank() != 4) throw InputError("conv2d expects [B,H,W,C], got " + shape_string(xv.shape()));
  if (wv.rank() != 4 || wv.dim(0) != wv.dim(1) || wv.dim(0) % 2 == 0 || wv.dim(2) != xv.dim(3) ||
      b.value().size() != static_cast<std::size_t>(wv.dim(3))) {
    throw ConfigError("conv2d: kernel " + shape_string(wv.shape()) + " incompatible with input " +
                      shape_string(xv.shape()));
  }
  const std::int64_t B = xv.dim(0), H = xv.dim(1), W = xv.dim(2), Cin = xv.dim(3);
  const int K = static_cast<int>(wv.dim(0));
  const std::int64_t Cout = wv.dim(3);
  const std::int64_t KKC = static_cast<std::int64_t>(K) * K * Cin;
  const std::int64_t HW = H * W;
  Tensor<T> out({B, H, W, Cout});
  CMapR<T> Wm(wv.data(), KKC, Cout);
  const auto bias = Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(b.value().data(), Cout);
  if (K == 1) {
    MapR<T> Y(out.data(), B * HW, Cout);
    Y.noalias() = CMapR<T>(xv.data(), B * HW, Cin) * Wm;
    Y.rowwise() += bias;
  } else {
    AlignedVector<T> col(static_cast<std::size_t>(std::min(kConvChunkPixels, HW) * KKC));
    for (std::int64_t bi = 0; bi < B; ++bi) {
      for (std::int64_t p0 = 0; p0 < HW; p0 += kConvChunkPixels) {
        const std::int64_t np = std::min(kConvChunkPixels, HW - p0);
        im2col(xv, bi, p0, np, K, col.data());
        MapR<T> Y(out.data() + (bi * HW + p0) * Cout, np, Cout);
        Y.noalias() = CMapR<T>(col.data(), np, KKC) * Wm;
        Y.rowwise() += bias;
      }
    }
  }
  return x.graph().make(std::move(out), {x, w, b}, [B, HW, Cin, Cout, K, KKC](Node<T>& n) {
    const auto& xv = n.parents[0]->value;
    CMapR<T> Wm(n.parents[1]->value.data(), KKC, Cout);
    if (wants(n, 2)) {
      Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(grad_of(n, 2).data(), Cout) +=
          CMapR<T>(n.grad.data(), B * HW, Cout).colwise().sum();
    }
    if (K == 1) {
      CMapR<T> G(n.grad.data(), B * HW, Cout);
      if (wants(n, 0)) MapR<T>(grad_of(n, 0).data(), B * HW, Cin).noalias() += G * Wm.transpose();
      if (wants(n, 1)) {
        MapR<T>(grad_of(n, 1).data(), KKC, Cout).noalias() +=
            CMapR<T>(xv.data(), B * HW, Cin).transpose() * G;
      }
      return;
    }
    const std::int64_t chunk = std::min(kConvChunkPixels, HW);
    AlignedVector<T> col(static_cast<std::size_t>(chunk * KKC));
    MatR<T> dcol;
    for (std::int64_t bi = 0; bi < B; ++bi) {
      for (std::int64_t p0 = 0; p0 < HW; p0 += kConvChunkPixels) {
        const std::int64_t np = std::min(kConvChunkPixels, HW - p0);
        CMapR<T> G(n.grad.data() + (bi * HW + p0) * Cout, np, Cout);
        if (wants(n, 1)) {
          im2col(xv, bi, p0, np, K, col.data());
          MapR<T>(grad_of(n, 1).data(), KKC, Cout).noalias() += CMapR<T>(col.data(), np, KKC).transpose() * G;
        }
        if (wants(n, 0)) {
          dcol.noalias() = G * Wm.transpose();
          col2im_add(dcol.data(), bi, p0, np, K, grad_of(n, 0));
        }
      }
    }
  });
}

template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw InputError("concat_channels: no inputs");
  Shape lead = parts[0].shape();
  lead.pop_back();
  std::vector<std::int64_t> widths;
  std::int64_t total = 0;
  for (const auto& p : parts) {
    Shape s = p.shape();
    const auto c = s.back();
    s.pop_back();
    if (s != lead) throw InputError("concat_channels: leading shapes differ");
    widths.push_back(c);
    total += c;
  }
  const std::int64_t rows = shape_numel(lead);
  Shape os = lead;
  os.push_back(total);
  Tensor<T> out(os);
  std::int64_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& v = parts[k].value();
    for (std::int64_t r = 0; r < rows; ++r)
      std::copy_n(v.data() + r * widths[k], widths[k], out.data() + r * total + off);
    off += widths[k];
  }
  return parts[0].graph().make(std::move(out), parts, [rows, total, widths](Node<T>& n) {
    std::int64_t off = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      if (wants(n, k)) {
        auto& g = grad_of(n, k);
        for (std::int64_t r = 0; r < rows; ++r)
          for (std::int64_t c = 0; c < widths[k]; ++c) g[r * widths[k] + c] += n.grad[r * total + off + c];
      }
      off += widths[k];
    }
  });
}

namespace {

template <typename T>
void require_rank4(const Tensor<T>& t, const char* op) {
  if (t.rank() != 4) throw InputError(std::string(op) + " expects [B,H,W,C], got " + shape_string(t.shape()));
}

}  // namespace

template <typename T>
Var<T> global_avg_pool(const Var<T>& x) {
  const auto& xv = x.value();
  require_rank4(xv, "global_avg_pool");
  const std::int64_t B = xv.dim(0), S = xv.dim(1) * xv.dim(2), C = xv.dim(3);
  Tensor<T> out({B, C});
  for (std::int64_t b = 0; b < B; ++b)
    for (std::int64_t s = 0; s < S; ++s)
      for (std::int64_t c = 0; c < C; ++c) out[b * C + c] += xv[(b * S + s) * C + c];
  for (auto& v : out.values()) v /= T(S);
  return x.graph().make(std::move(out), {x}, [B, S, C](Node<T>& n) {
    auto& g = grad_of(n, 0);
    for (std::int64_t b = 0; b < B; ++b)
      for (std::int64_t s = 0; s < S; ++s)
        for (std::int64_t c = 0; c < C; ++c) g[(b * S + s) * C + c] += n.grad[b * C + c] / T(S);
  });
}

template <typename T>
Var<T> global_max_pool(const Var<T>& x) {
  const auto& xv = x.value();
  require_rank4(xv, "global_max_pool");
  const std::int64_t B = xv.dim(0), S = xv.dim(1) * xv.dim(2), C = xv.dim(3);
  Tensor<T> out({B, C}, -std::numeric_limits<T>::infinity());
  std::vector<std::int64_t> arg(static_cast<std::size_t>(B * C), 0);
  for (std::int64_t b = 0; b < B; ++b)
    for (std::int64_t s = 0; s < S; ++s)
      for (std::int64_t c = 0; c < C; ++c) {
        const T v = xv[(b * S + s) * C + c];
        if (v > out[b * C + c]) {
          out[b * C + c] = v;
          arg[b * C + c] = (b * S + s) * C + c;
        }
      }
  return x.graph().make(std::move(out), {x}, [arg = std::move(arg)](Node<T>& n) {
    auto& g = grad_of(n, 0);
    for (std::size_t i = 0; i < arg.size(); ++i) g[static_cast<std::size_t>(arg[i])] += n.grad[i];
  });
}

template <typename T>
Var<T> channel_mean(const Var<T>& x) {
  const auto& xv = x.value();
  require_rank4(xv, "channel_mean");
  const std::int64_t P = xv.dim(0) * xv.dim(1) * xv.dim(2), C = xv.dim(3);
  Tensor<T> out({xv.dim(0), xv.dim(1), xv.dim(2), 1});
  for (std::int64_t p = 0; p < P; ++p) {
    T s = 0;
    for (std::int64_t c = 0; c < C; ++c) s += xv[p * C + c];
    out[p] = s / T(C);
  }
  return x.graph().make(std::move(out), {x}, [P, C](Node<T>& n) {
    auto& g = grad_of(n, 0);
    for (std::int64_t p = 0; p < P; ++p)
      for (std::int64_t c = 0; c < C; ++c) g[p * C + c] += n.grad[p] / T(C);
  });
}

template <typename T>
Var<T> channel_max(const Var<T>& x) {
  const auto& xv = x.value();
  require_rank4(xv, "channel_max");
  const std::int64_t P = xv.dim(0) * xv.dim(1) * xv.dim(2), C = xv.dim(3);
  Tensor<T> out({xv.dim(0), xv.dim(1), xv.dim(2), 1});
  std::vector<std::int64_t> arg(static_cast<std::size_t>(P));
  for (std::int64_t p = 0; p < P; ++p) {
    std::int64_t best = 0;
    for (std::int64_t c = 1; c < C; ++c)
      if (xv[p * C + c] > xv[p * C + best]) best = c;
    out[p] = xv[p * C + best];
    arg[p] = p * C + best;
  }
  return x.graph().make(std::move(out), {x}, [arg = std::move(arg)](Node<T>& n) {
    auto& g = grad_of(n, 0);
    for (std::size_t p = 0; p < arg.size(); ++p) g[static_cast<std::size_t>(arg[p])] += n.grad[p];
  });
}

template <typename T>
Var<T> reflect_pad(const Var<T>& x, std::int64_t pad_bottom, std::int64_t pad_right) {
  const auto& xv = x.value();
  require_rank4(xv, "reflect_pad");
  if (pad_bottom < 0 || pad_right < 0) throw InputError("reflect_pad: negative padding");
  if (pad_bottom == 0 && pad_right == 0) return x;
  const std::int64_t B = xv.dim(0), H = xv.dim(1), W = xv.dim(2), C = xv.dim(3);
  const std::int64_t Ho = H + pad_bottom, Wo = W + pad_right;
  Tensor<T> out({B, Ho, Wo, C});
  for (std::int64_t b = 0; b < B; ++b)
    for (std::int64_t y = 0; y < Ho; ++y)
      for (std::int64_t xx = 0; xx < Wo; ++xx) {
        const T* src = &xv.at(b, reflect_index(y, H), reflect_index(xx, W), 0);
        std::copy_n(src, C, &out.at(b, y, xx, 0));
      }
  return x.graph().make(std::move(out), {x}, [B, H, W, C, Ho, Wo](Node<T>& n) {
    auto& g = grad_of(n, 0);
    for (std::int64_t b = 0; b < B; ++b)
      for (std::int64_t y = 0; y < Ho; ++y)
        for (std::int64_t xx = 0; xx < Wo; ++xx) {
          T* dst = &g.at(b, reflect_index(y, H), reflect_index(xx, W), 0);
          const T* src = &n.grad.at(b, y, xx, 0);
          for (std::int64_t c = 0; c < C; ++c) dst[c] += src[c];
        }
  });
}

template <typename T>
Var<T> crop(const Var<T>& x, std::int64_t height, std::int64_t width) {
  const auto& xv = x.value();
  require_rank4(xv, "crop");
  const std::int64_t B = xv.dim(0), H = xv.dim(1), W = xv.dim(2), C = xv.dim(3);
  if (height > H || width > W || height < 0 || width < 0) throw InputError("crop: region exceeds input");
  if (height == H && width == W) return x;
  Tensor<T> out({B, height, width, C});
  for (std::int64_t b = 0; b < B; ++b)
    for (std::int64_t y = 0; y < height; ++y) std::copy_n(&xv.at(b, y, 0, 0), width * C, &out.at(b, y, 0, 0));
  return x.graph().make(std::move(out), {x}, [B, height, width, C](Node<T>& n) {
    auto& g = grad_of(n, 0);
    for (std::int64_t b = 0; b < B; ++b)
      for (std::int64_t y = 0; y < height; ++y)
        for (std::int64_t i = 0; i < width * C; ++i) (&g.at(b, y, 0, 0))[i] += (&n.grad.at(b, y, 0, 0))[i];
  });
}

template <typename T>
Var<T> pixel_shuffle(const Var<T>& x, int scale) {
  Tensor<T> out = hatsr::pixel_shuffle(x.value(), scale);
  return x.graph().make(std::move(out), {x}, [scale](Node<T>& n) {
    const Tensor<T> back = hatsr::pixel_unshuffle(n.grad, scale);
    auto& g = grad_of(n, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += back[i];
  });
}

template <typename T>
Var<T> mse(const Var<T>& pred, const Var<T>& target) {
  require_same_shape(pred.shape(), target.shape(), "mse");
  const auto& p = pred.value();
  const auto& t = target.value();
  if (p.size() == 0) throw InputError("mse: empty input");
  T acc = 0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += (p[i] - t[i]) * (p[i] - t[i]);
  const T count = T(p.size());
  return pred.graph().make(Tensor<T>({1}, {acc / count}), {pred, target}, [count](Node<T>& n) {
    const auto& p = n.parents[0]->value;
    const auto& t = n.parents[1]->value;
    const T g0 = n.grad[0] * T(2) / count;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const T d = g0 * (p[i] - t[i]);
      if (wants(n, 0)) grad_of(n, 0)[i] += d;
      if (wants(n, 1)) grad_of(n, 1)[i] -= d;
    }
  });
}

template <typename T>
Var<T> sum(const Var<T>& x) {
  T acc = 0;
  for (auto v : x.value().values()) acc += v;
  return x.graph().make(Tensor<T>({1}, {acc}), {x}, [](Node<T>& n) {
    auto& g = grad_of(n, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[0];
  });
}

#define HATSR_INSTANTIATE_OPS(T)                                                   \
  template Var<T> add(const Var<T>&, const Var<T>&);                               \
  template Var<T> sub(const Var<T>&, const Var<T>&);                               \
  template Var<T> add_scaled(const Var<T>&, const Var<T>&, T);                     \
  template Var<T> mul(const Var<T>&, const Var<T>&);                               \
  template Var<T> mul_channel_gate(const Var<T>&, const Var<T>&);                  \
  template Var<T> mul_spatial_gate(const Var<T>&, const Var<T>&);                  \
  template Var<T> sigmoid(const Var<T>&);                                          \
  template Var<T> relu(const Var<T>&);                                             \
  template Var<T> gelu(const Var<T>&);                                             \
  template Var<T> linear(const Var<T>&, const Var<T>&, const Var<T>&);             \
  template Var<T> layer_norm(const Var<T>&, const Var<T>&, const Var<T>&, T);      \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, const Var<T>&);             \
  template Var<T> concat_channels(const std::vector<Var<T>>&);                     \
  template Var<T> global_avg_pool(const Var<T>&);                                  \
  template Var<T> global_max_pool(const Var<T>&);                                  \
  template Var<T> channel_mean(const Var<T>&);                                     \
  template Var<T> channel_max(const Var<T>&);                                      \
  template Var<T> reflect_pad(const Var<T>&, std::int64_t, std::int64_t);          \
  template Var<T> crop(const Var<T>&, std::int64_t, std::int64_t);                 \
  template Var<T> pixel_shuffle(const Var<T>&, int);                               \
  template Var<T> mse(const Var<T>&, const Var<T>&);                               \
  template Var<T> sum(const Var<T>&);

HATSR_INSTANTIATE_OPS(float)
HATSR_INSTANTIATE_OPS(double)

}  // namespace hatsr::ag
