#pragma once

// Image quality metrics. SSIM uses the standard 11x11 Gaussian window with
// sigma 1.5 and constants C1 = 0.01^2, C2 = 0.03^2 on [0, 1] data; the local
// statistics are computed with zero-padded same-size convolutions.

#include "omnisplat/image.hpp"

namespace omnisplat {

inline constexpr double kPsnrCap = 99.0;  // reported for zero-MSE pairs

// 10 * log10(1 / MSE) over all pixels and channels, capped at kPsnrCap.
double psnr(const Image& a, const Image& b);

// Mean SSIM over all map pixels and channels.
double ssim(const Image& a, const Image& b);

// SSIM plus d(SSIM)/d(a). grad must be an image of the same size.
double ssim_with_gradient(const Image& a, const Image& b, Image& grad);

}  // namespace omnisplat
