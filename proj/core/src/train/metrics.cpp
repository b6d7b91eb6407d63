#include "hatsr/train/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "hatsr/error.hpp"

namespace hatsr::train {

namespace {

void check_shapes(const Image2D& a, const Image2D& b, const char* what) {
  if (!a.same_shape(b) || a.size() == 0) throw InputError(std::string(what) + ": image shapes differ or are empty");
}

std::int64_t mirror(std::int64_t i, std::int64_t n) {
  // Half-sample symmetric: ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
  const std::int64_t period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

constexpr int kRadius = 5;

std::array<double, 2 * kRadius + 1> gaussian_taps() {
  std::array<double, 2 * kRadius + 1> g{};
  double s = 0;
  for (int i = -kRadius; i <= kRadius; ++i) s += g[i + kRadius] = std::exp(-(i * i) / (2 * 1.5 * 1.5));
  for (double& v : g) v /= s;
  return g;
}

// Separable Gaussian smoothing of a row-major field.
std::vector<double> blur(const std::vector<double>& f, std::int64_t h, std::int64_t w) {
  static const auto g = gaussian_taps();
  std::vector<double> tmp(f.size()), out(f.size());
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x) {
      double s = 0;
      for (int k = -kRadius; k <= kRadius; ++k) s += g[k + kRadius] * f[y * w + mirror(x + k, w)];
      tmp[y * w + x] = s;
    }
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x) {
      double s = 0;
      for (int k = -kRadius; k <= kRadius; ++k) s += g[k + kRadius] * tmp[mirror(y + k, h) * w + x];
      out[y * w + x] = s;
    }
  return out;
}

}  // namespace

double mse_loss(const Image2D& pred, const Image2D& target) {
  check_shapes(pred, target, "mse_loss");
  double s = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.data[i] - target.data[i];
    s += d * d;
  }
  return s / static_cast<double>(pred.size());
}

double psnr(const Image2D& pred, const Image2D& target, double peak) {
  if (!(peak > 0)) throw InputError("psnr: peak must be positive");
  const double m = mse_loss(pred, target);
  if (m == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / m);
}

double ssim(const Image2D& pred, const Image2D& target, double peak) {
  check_shapes(pred, target, "ssim");
  if (!(peak > 0)) throw InputError("ssim: peak must be positive");
  const auto h = pred.height, w = pred.width;
  const std::size_t n = pred.size();
  std::vector<double> xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    xx[i] = pred.data[i] * pred.data[i];
    yy[i] = target.data[i] * target.data[i];
    xy[i] = pred.data[i] * target.data[i];
  }
  const auto mx = blur(pred.data, h, w), my = blur(target.data, h, w);
  const auto sxx = blur(xx, h, w), syy = blur(yy, h, w), sxy = blur(xy, h, w);
  const double c1 = std::pow(0.01 * peak, 2), c2 = std::pow(0.03 * peak, 2);
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double vx = sxx[i] - mx[i] * mx[i], vy = syy[i] - my[i] * my[i], cxy = sxy[i] - mx[i] * my[i];
    total += (2 * mx[i] * my[i] + c1) * (2 * cxy + c2) / ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(n);
}

}  // namespace hatsr::train
