#include "gardin/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "gardin/error.hpp"
#include "gardin/imaging.hpp"

namespace gardin {
namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

uint8_t quantize(double v) {
  const double c = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
  return static_cast<uint8_t>(std::lround(c * 255.0));
}

}  // namespace

GrayImage read_png_as_gray(const std::filesystem::path& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("failed to decode " + path.string());
  }

  png_init_io(png, f.get());
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  const int h = static_cast<int>(png_get_image_height(png, info));
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path.string() + ": unsupported channel count after expansion");
  }

  std::vector<uint8_t> buf(static_cast<size_t>(h) * w * channels);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y) rows[y] = buf.data() + static_cast<size_t>(y) * w * channels;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (channels == 1) {
    GrayImage out(h, w);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = buf[i] / 255.0;
    return out;
  }
  RgbImage rgb(h, w);
  for (size_t i = 0; i < rgb.data.size(); ++i) rgb.data[i] = buf[i] / 255.0;
  return to_grayscale(rgb);
}

namespace {

void write_png(const std::filesystem::path& path, int h, int w, int color_type,
               const std::vector<uint8_t>& buf, int channels) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw IoError("cannot create " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed to encode " + path.string());
  }

  png_init_io(png, f.get());
  png_set_IHDR(png, info, w, h, 8, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y)
    rows[y] = const_cast<png_bytep>(buf.data() + static_cast<size_t>(y) * w * channels);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_png_gray(const std::filesystem::path& path, const GrayImage& img) {
  require_valid(img, "write_png_gray");
  std::vector<uint8_t> buf(img.data.size());
  for (size_t i = 0; i < buf.size(); ++i) buf[i] = quantize(img.data[i]);
  write_png(path, img.height, img.width, PNG_COLOR_TYPE_GRAY, buf, 1);
}

void write_png_rgb(const std::filesystem::path& path, const RgbImage& img) {
  require_valid(img, "write_png_rgb");
  std::vector<uint8_t> buf(img.data.size());
  for (size_t i = 0; i < buf.size(); ++i) buf[i] = quantize(img.data[i]);
  write_png(path, img.height, img.width, PNG_COLOR_TYPE_RGB, buf, 3);
}

}  // namespace gardin
