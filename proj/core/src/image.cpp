#include "gardin/image.hpp"

#include <cmath>
#include <string>

#include "gardin/error.hpp"

namespace gardin {

void require_valid(const GrayImage& img, const char* what) {
  if (img.empty() || img.data.size() != static_cast<size_t>(img.pixels()))
    throw ValidationError(std::string(what) + ": empty or inconsistent image");
  for (double v : img.data)
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw ValidationError(std::string(what) + ": intensity outside [0,1]");
}

void require_valid(const RgbImage& img, const char* what) {
  if (img.empty() || img.data.size() != static_cast<size_t>(img.height) * img.width * 3)
    throw ValidationError(std::string(what) + ": empty or inconsistent image");
  for (double v : img.data)
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw ValidationError(std::string(what) + ": channel value outside [0,1]");
}

void require_same_shape(const GrayImage& a, const GrayImage& b, const char* what) {
  if (a.height != b.height || a.width != b.width)
    throw ValidationError(std::string(what) + ": shape mismatch " + std::to_string(a.height) +
                          "x" + std::to_string(a.width) + " vs " + std::to_string(b.height) +
                          "x" + std::to_string(b.width));
}

}  // namespace gardin
