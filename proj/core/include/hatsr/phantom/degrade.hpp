#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "hatsr/image.hpp"
#include "hatsr/phantom/phantom.hpp"
#include "hatsr/train/dataset.hpp"

namespace hatsr::phantom {

struct DegradationConfig {
  int truncation_factor = 2;
  double noise_sigma = 0.01;
  bool keep_grid = false;  // zero-filled full grid instead of the reduced grid

  /// Throws ConfigError when truncation_factor < 1 or noise_sigma < 0.
  void validate() const;
};

struct ComplexImage {
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<std::complex<double>> data;  // row-major

  std::complex<double> operator()(std::int64_t y, std::int64_t x) const {
    return data[static_cast<std::size_t>(y * width + x)];
  }
};

/// Unnormalized 2D DFT (forward sign -1, no scaling) of a complex grid.
ComplexImage fft2(const ComplexImage& img);

/// Complex image after central k-space truncation, before taking the
/// magnitude. Frequencies kept per axis: [-floor(M/2), M - floor(M/2)) with
/// M = N / factor. Scaled so a constant image maps to itself. Throws
/// InputError when the factor does not divide both extents.
ComplexImage kspace_truncate_complex(const Image2D& hr, const DegradationConfig& cfg);

/// Magnitude of kspace_truncate_complex. Pixel spacing grows by the factor
/// unless keep_grid is set.
Image2D kspace_truncate(const Image2D& hr, const DegradationConfig& cfg);

/// |(img + n1) + i n2| with independent N(0, sigma^2) draws.
Image2D add_rician_noise(const Image2D& img, double sigma, std::uint64_t seed);

/// kspace_truncate followed by Rician noise.
Image2D degrade(const Image2D& hr, const DegradationConfig& cfg, std::uint64_t seed);

/// n perturbed phantoms with their degraded counterparts. Each pair is its
/// own subject; sides alternate L/R.
train::PairedDataset make_paired_dataset(int n, const PhantomSpec& base_spec, const DegradationConfig& cfg,
                                         std::uint64_t seed, double lesion_prob = 0.5);

}  // namespace hatsr::phantom
