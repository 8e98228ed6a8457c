#include <doctest.h>

#include <png.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gardin/error.hpp"
#include "gardin/png_io.hpp"
#include "gardin/rng.hpp"

using namespace gardin;

namespace {

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "gardin_png_test";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("grayscale png roundtrip is exact at 8-bit resolution") {
  Rng rng(1);
  GrayImage img(37, 53);
  for (auto& v : img.data) v = std::round(rng.uniform() * 255.0) / 255.0;
  const auto path = temp_dir() / "gray.png";
  write_png_gray(path, img);
  const GrayImage back = read_png_as_gray(path);
  REQUIRE(back.height == img.height);
  REQUIRE(back.width == img.width);
  for (size_t i = 0; i < img.data.size(); ++i)
    CHECK(back.data[i] == doctest::Approx(img.data[i]).epsilon(1e-12));
}

TEST_CASE("rgb png decodes through the BT.601 conversion") {
  RgbImage rgb(8, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) rgb.at(y, x, 0) = 1.0;  // pure red
  const auto path = temp_dir() / "rgb.png";
  write_png_rgb(path, rgb);
  const GrayImage gray = read_png_as_gray(path);
  for (double v : gray.data) CHECK(v == doctest::Approx(0.299 * 255 / 255.0).epsilon(1e-2));
}

TEST_CASE("adam7-interlaced files decode correctly") {
  Rng rng(2);
  const int h = 21, w = 33;
  std::vector<uint8_t> pixels(static_cast<size_t>(h) * w);
  for (auto& p : pixels) p = static_cast<uint8_t>(rng.below(256));

  const auto path = temp_dir() / "interlaced.png";
  FILE* f = std::fopen(path.c_str(), "wb");
  REQUIRE(f != nullptr);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  REQUIRE(setjmp(png_jmpbuf(png)) == 0);
  png_init_io(png, f);
  png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_ADAM7,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const int passes = png_set_interlace_handling(png);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y) rows[static_cast<size_t>(y)] = pixels.data() + static_cast<size_t>(y) * w;
  for (int p = 0; p < passes; ++p) png_write_rows(png, rows.data(), static_cast<png_uint_32>(h));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(f);

  const GrayImage img = read_png_as_gray(path);
  REQUIRE(img.height == h);
  REQUIRE(img.width == w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      CHECK(img.at(y, x) ==
            doctest::Approx(pixels[static_cast<size_t>(y) * w + x] / 255.0).epsilon(1e-12));
}

TEST_CASE("missing and corrupt files raise IoError") {
  CHECK_THROWS_AS(read_png_as_gray(temp_dir() / "nope.png"), IoError);
  const auto bad = temp_dir() / "bad.png";
  std::ofstream(bad) << "this is not a png";
  CHECK_THROWS_AS(read_png_as_gray(bad), IoError);
}

TEST_CASE("identical content writes identical bytes") {
  GrayImage img(16, 16, 0.25);
  img.at(3, 4) = 0.75;
  const auto p1 = temp_dir() / "a.png";
  const auto p2 = temp_dir() / "b.png";
  write_png_gray(p1, img);
  write_png_gray(p2, img);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  const std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  const std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  CHECK(!s1.empty());
}
