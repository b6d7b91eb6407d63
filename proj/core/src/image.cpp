#include "hatsr/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "hatsr/error.hpp"

namespace hatsr {

Image2D::Image2D(std::int64_t h, std::int64_t w, double spacing, double fill)
    : height(h), width(w), pixel_spacing(spacing) {
  if (h < 0 || w < 0) throw InputError("image extents must be nonnegative");
  data.assign(static_cast<std::size_t>(h * w), fill);
}

bool Image2D::all_finite() const {
  return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
}

namespace {

// Linear interpolation between order statistics (R type 7).
double percentile_sorted(const std::vector<double>& sorted, double pct) {
  const double pos = pct / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double keys_weight(double t) {
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

}  // namespace

Image2D normalize_percentile(const Image2D& img, double lo_pct, double hi_pct) {
  if (img.size() == 0) throw InputError("normalize_percentile: empty image");
  if (!img.all_finite()) throw InputError("normalize_percentile: non-finite pixels");
  if (!(lo_pct >= 0 && lo_pct < hi_pct && hi_pct <= 100)) throw ConfigError("normalize_percentile: bad percentiles");
  std::vector<double> sorted = img.data;
  std::sort(sorted.begin(), sorted.end());
  const double lo = percentile_sorted(sorted, lo_pct);
  const double hi = percentile_sorted(sorted, hi_pct);
  Image2D out(img.height, img.width, img.pixel_spacing);
  if (hi <= lo) return out;
  for (std::size_t i = 0; i < img.size(); ++i) out.data[i] = (std::clamp(img.data[i], lo, hi) - lo) / (hi - lo);
  return out;
}

Image2D bicubic_upscale(const Image2D& img, int scale) {
  if (scale < 1) throw ConfigError("bicubic_upscale: scale must be >= 1");
  if (img.height == 0 || img.width == 0) throw InputError("bicubic_upscale: empty image");
  const std::int64_t H = img.height * scale, W = img.width * scale;
  Image2D out(H, W, img.pixel_spacing / scale);
  // Separable: each output coordinate depends on four taps along each axis.
  auto taps = [scale](std::int64_t j, std::int64_t n, std::array<std::int64_t, 4>& idx, std::array<double, 4>& w) {
    const std::int64_t base = j / scale;
    const double frac = static_cast<double>(j % scale) / scale;
    for (int k = 0; k < 4; ++k) {
      idx[k] = std::clamp<std::int64_t>(base - 1 + k, 0, n - 1);
      w[k] = keys_weight(frac - (k - 1));
    }
  };
  Image2D rows(img.height, W);
  std::array<std::int64_t, 4> ix;
  std::array<double, 4> wx;
  for (std::int64_t x = 0; x < W; ++x) {
    taps(x, img.width, ix, wx);
    for (std::int64_t y = 0; y < img.height; ++y) {
      double acc = 0;
      for (int k = 0; k < 4; ++k) acc += wx[k] * img(y, ix[k]);
      rows(y, x) = acc;
    }
  }
  for (std::int64_t y = 0; y < H; ++y) {
    taps(y, img.height, ix, wx);
    for (std::int64_t x = 0; x < W; ++x) {
      double acc = 0;
      for (int k = 0; k < 4; ++k) acc += wx[k] * rows(ix[k], x);
      out(y, x) = acc;
    }
  }
  return out;
}

template <typename T>
Tensor<T> images_to_tensor(const std::vector<const Image2D*>& images) {
  if (images.empty()) throw InputError("images_to_tensor: no images");
  const auto H = images[0]->height, W = images[0]->width;
  Tensor<T> t({static_cast<std::int64_t>(images.size()), H, W, 1});
  for (std::size_t b = 0; b < images.size(); ++b) {
    if (images[b]->height != H || images[b]->width != W) throw InputError("images_to_tensor: mixed extents");
    std::transform(images[b]->data.begin(), images[b]->data.end(), t.data() + b * H * W,
                   [](double v) { return static_cast<T>(v); });
  }
  return t;
}

template <typename T>
Tensor<T> image_to_tensor(const Image2D& img) {
  return images_to_tensor<T>({&img});
}

template <typename T>
Image2D tensor_to_image(const Tensor<T>& t, std::int64_t index, double pixel_spacing) {
  if (t.rank() != 4) throw InputError("tensor_to_image expects [B,H,W,C]");
  Image2D img(t.dim(1), t.dim(2), pixel_spacing);
  for (std::int64_t y = 0; y < img.height; ++y)
    for (std::int64_t x = 0; x < img.width; ++x) img(y, x) = static_cast<double>(t.at(index, y, x, 0));
  return img;
}

template Tensor<float> images_to_tensor(const std::vector<const Image2D*>&);
template Tensor<double> images_to_tensor(const std::vector<const Image2D*>&);
template Tensor<float> image_to_tensor(const Image2D&);
template Tensor<double> image_to_tensor(const Image2D&);
template Image2D tensor_to_image(const Tensor<float>&, std::int64_t, double);
template Image2D tensor_to_image(const Tensor<double>&, std::int64_t, double);

}  // namespace hatsr
