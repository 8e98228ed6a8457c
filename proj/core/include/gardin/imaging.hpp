#pragma once

#include <string>

#include "gardin/image.hpp"

namespace gardin {

/// BT.601 luma conversion.
GrayImage to_grayscale(const RgbImage& rgb);

/// Center-aligned bilinear resampling, no aspect-ratio preservation.
GrayImage resize_bilinear(const GrayImage& img, int out_h, int out_w);

/// Magnitude of the two 3x3 Sobel responses with replicate border padding,
/// normalized by 4*sqrt(2) so any [0,1] input maps into [0,1].
GrayImage sobel_gradient(const GrayImage& img);

/// Mean local SSIM over an 11x11 Gaussian window (sigma 1.5, K1=0.01,
/// K2=0.03, dynamic range 1). Windows are centered at every pixel with
/// replicate borders, so the metric is defined for any image size.
double ssim(const GrayImage& i1, const GrayImage& i2);

/// d(SSIM)/d(first argument), same window setup as ssim().
GrayImage ssim_gradient(const GrayImage& x, const GrayImage& y);

/// Selects which terms enter the combined image distance.
struct DistanceParts {
  bool l1 = false;
  bool l2 = false;
  bool ss = false;
  bool nr = false;

  static DistanceParts defaults() { return {true, true, true, false}; }
  bool any() const { return l1 || l2 || ss || nr; }

  std::string to_string() const;
  /// Parses e.g. "l1,l2,ss" (case-insensitive, '+' also accepted).
  static DistanceParts parse(const std::string& s);
};

/// Combined image distance: sum of the selected components.
///   l1 — mean absolute difference
///   l2 — sqrt(sum of squared differences) / n
///   ss — (1 - SSIM) / 2
///   nr — RMSE, i.e. 10^(-PSNR/20) for unit dynamic range
double distance(const GrayImage& i1, const GrayImage& i2, DistanceParts parts);

struct DistanceGrad {
  double value = 0.0;
  GrayImage grad;  // d(distance)/d(gen)
};

/// distance(gen, ref, parts) together with its gradient in the first argument.
DistanceGrad distance_with_grad(const GrayImage& gen, const GrayImage& ref, DistanceParts parts);

}  // namespace gardin
