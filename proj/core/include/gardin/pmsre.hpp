#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gardin/image.hpp"

namespace gardin {

/// Partial mean-squared reconstruction errors: appearance/gradient block
/// errors interleaved as [e1(a), e1(s), e2(a), e2(s), e3(a), e3(s), e4(a), e4(s)].
/// Blocks tile the 64x64 image as a 2x2 grid of 32x32, row-major
/// (1 top-left, 2 top-right, 3 bottom-left, 4 bottom-right).
struct PmsreVector {
  std::array<double, 8> e{};
};

/// Mean squared error over block k (1..4) of two 64x64 images.
double block_mse(const GrayImage& real, const GrayImage& gen, int k);

/// The interleaved 8-vector from real and generated appearance/gradient images.
PmsreVector pmsre(const GrayImage& a, const GrayImage& a_gen, const GrayImage& s,
                  const GrayImage& s_gen);

struct PmsreRecord {
  std::string video_id;
  int frame = 0;
  int region_idx = 0;
  PmsreVector e;
};

/// CSV export: header `video_id,frame,region_idx,e1a,e1s,e2a,e2s,e3a,e3s,e4a,e4s`.
void write_pmsre_csv(const std::filesystem::path& path, std::span<const PmsreRecord> records);

}  // namespace gardin
