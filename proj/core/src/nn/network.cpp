#include "hatsr/nn/network.hpp"

#include <algorithm>
#include <cmath>

#include "hatsr/error.hpp"
#include "hatsr/ops.hpp"

namespace hatsr::nn {

template <typename T>
Var<T> shallow_extract(Scope<T>& s, const Var<T>& image) {
  const auto& v = image.value();
  if (v.rank() != 4 || v.dim(3) != s.config().in_channels) {
    throw InputError("shallow_extract: expected [B,H,W," + std::to_string(s.config().in_channels) + "], got " +
                     shape_string(v.shape()));
  }
  if (v.size() == 0) throw InputError("shallow_extract: empty input");
  for (T x : v.values())
    if (!std::isfinite(x)) throw InputError("shallow_extract: non-finite pixel in input");
  return inception_conv(s, "shallow", image);
}

template <typename T>
Var<T> deep_extract(Scope<T>& s, const Var<T>& f0) {
  Var<T> h = f0;
  for (int i = 0; i < s.config().num_rhag; ++i) h = rhag_forward(s, i, h);
  return inception_conv(s, "deep.conv", h);
}

template <typename T>
Var<T> reconstruct(Scope<T>& s, const Var<T>& f0, const Var<T>& fdf) {
  if (f0.shape() != fdf.shape()) {
    throw InputError("reconstruct: shallow " + shape_string(f0.shape()) + " and deep " + shape_string(fdf.shape()) +
                     " features differ in shape");
  }
  auto h = inception_conv(s, "recon.pre", ag::add(f0, fdf));
  h = ag::pixel_shuffle(h, s.config().upscale);
  return inception_conv(s, "recon.post", h);
}

std::int64_t padded_extent(std::int64_t extent, const ModelConfig& cfg) {
  const std::int64_t w = cfg.window_size;
  const std::int64_t need = std::max<std::int64_t>(extent, cfg.overlap_window());
  return (need + w - 1) / w * w;
}

template <typename T>
Var<T> forward(Scope<T>& s, const Var<T>& image) {
  const auto& cfg = s.config();
  if (image.value().rank() != 4) throw InputError("forward expects [B,H,W,C], got " + shape_string(image.shape()));
  const std::int64_t H = image.dim(1), W = image.dim(2);
  if (H < 1 || W < 1) throw InputError("forward: empty image");
  const auto padded = ag::reflect_pad(image, padded_extent(H, cfg) - H, padded_extent(W, cfg) - W);
  const auto f0 = shallow_extract(s, padded);
  const auto fdf = deep_extract(s, f0);
  return ag::crop(reconstruct(s, f0, fdf), H * cfg.upscale, W * cfg.upscale);
}

template <typename T>
Tensor<T> super_resolve(const ModelWeights<T>& weights, const Tensor<T>& images) {
  ag::Graph<T> graph(false);
  Scope<T> scope(graph, weights, false);
  return forward(scope, graph.constant(images)).value();
}

template <typename T>
Image2D super_resolve(const ModelWeights<T>& weights, const Image2D& image) {
  const auto out = super_resolve(weights, image_to_tensor<T>(image));
  return tensor_to_image(out, 0, image.pixel_spacing / weights.config().upscale);
}

#define HATSR_INSTANTIATE_NETWORK(T)                                          \
  template Var<T> shallow_extract(Scope<T>&, const Var<T>&);                  \
  template Var<T> deep_extract(Scope<T>&, const Var<T>&);                     \
  template Var<T> reconstruct(Scope<T>&, const Var<T>&, const Var<T>&);       \
  template Var<T> forward(Scope<T>&, const Var<T>&);                          \
  template Tensor<T> super_resolve(const ModelWeights<T>&, const Tensor<T>&); \
  template Image2D super_resolve(const ModelWeights<T>&, const Image2D&);

HATSR_INSTANTIATE_NETWORK(float)
HATSR_INSTANTIATE_NETWORK(double)

}  // namespace hatsr::nn
