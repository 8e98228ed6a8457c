#pragma once

#include <filesystem>

#include "gardin/image.hpp"

namespace gardin {

/// Decodes an 8/16-bit gray, palette, RGB or RGBA PNG. Color files are
/// converted with to_grayscale(); 16-bit depth is reduced to 8.
GrayImage read_png_as_gray(const std::filesystem::path& path);

/// Writes an 8-bit grayscale PNG (values quantized by rounding to 0..255).
void write_png_gray(const std::filesystem::path& path, const GrayImage& img);

/// Writes an 8-bit RGB PNG.
void write_png_rgb(const std::filesystem::path& path, const RgbImage& img);

}  // namespace gardin
