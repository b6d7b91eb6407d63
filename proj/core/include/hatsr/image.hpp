#pragma once

#include <cstdint>
#include <vector>

#include "hatsr/tensor.hpp"

namespace hatsr {

/// Single-channel 2D intensity grid, row-major.
struct Image2D {
  std::int64_t height = 0;
  std::int64_t width = 0;
  double pixel_spacing = 1.0;  // mm per pixel
  std::vector<double> data;

  Image2D() = default;
  Image2D(std::int64_t h, std::int64_t w, double spacing = 1.0, double fill = 0.0);

  double& operator()(std::int64_t y, std::int64_t x) { return data[static_cast<std::size_t>(y * width + x)]; }
  double operator()(std::int64_t y, std::int64_t x) const { return data[static_cast<std::size_t>(y * width + x)]; }

  std::size_t size() const { return data.size(); }
  bool all_finite() const;
  bool same_shape(const Image2D& other) const { return height == other.height && width == other.width; }
};

/// Clips to the [lo_pct, hi_pct] intensity percentiles, then rescales to [0, 1].
/// A constant image maps to all zeros.
Image2D normalize_percentile(const Image2D& img, double lo_pct = 0.1, double hi_pct = 99.9);

/// Keys cubic convolution (a = -0.5) upscaling on the sample-aligned grid:
/// output pixel j sits at input coordinate j / scale, matching the sampling
/// of k-space truncation. Borders clamp.
Image2D bicubic_upscale(const Image2D& img, int scale);

/// [N,H,W,1] batch from same-shaped images.
template <typename T>
Tensor<T> images_to_tensor(const std::vector<const Image2D*>& images);
template <typename T>
Tensor<T> image_to_tensor(const Image2D& img);
/// Channel 0 of batch entry `index` of a [B,H,W,C] tensor.
template <typename T>
Image2D tensor_to_image(const Tensor<T>& t, std::int64_t index = 0, double pixel_spacing = 1.0);

}  // namespace hatsr
