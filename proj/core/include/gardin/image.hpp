#pragma once

#include <cstdint>
#include <vector>

namespace gardin {

/// Single-channel image with intensities in [0, 1], row-major.
/// The universal pixel container: appearance crops, gradient images and
/// generated images all live here.
struct GrayImage {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  GrayImage() = default;
  GrayImage(int h, int w, double fill = 0.0)
      : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {}

  double& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
  double at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }

  bool empty() const { return height <= 0 || width <= 0; }
  int64_t pixels() const { return static_cast<int64_t>(height) * width; }
};

/// Interleaved RGB image, channels in [0, 1].
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<double> data;  // 3 * height * width, r g b per pixel

  RgbImage() = default;
  RgbImage(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w * 3, 0.0) {}

  double& at(int y, int x, int c) { return data[(static_cast<size_t>(y) * width + x) * 3 + c]; }
  double at(int y, int x, int c) const { return data[(static_cast<size_t>(y) * width + x) * 3 + c]; }

  bool empty() const { return height <= 0 || width <= 0; }
};

/// Throws ValidationError unless the image is non-empty with finite values in [0, 1].
void require_valid(const GrayImage& img, const char* what);
void require_valid(const RgbImage& img, const char* what);

/// Throws ValidationError unless both images have identical dimensions.
void require_same_shape(const GrayImage& a, const GrayImage& b, const char* what);

}  // namespace gardin
