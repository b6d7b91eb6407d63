#pragma once

#include "hatsr/image.hpp"

namespace hatsr::train {

/// Mean squared pixel difference. Throws InputError on a shape mismatch.
double mse_loss(const Image2D& pred, const Image2D& target);

/// 10 log10(peak^2 / MSE); +infinity for identical images.
double psnr(const Image2D& pred, const Image2D& target, double peak = 1.0);

/// Mean SSIM with an 11-tap Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03 and symmetric borders, so any image size works.
double ssim(const Image2D& pred, const Image2D& target, double peak = 1.0);

}  // namespace hatsr::train
