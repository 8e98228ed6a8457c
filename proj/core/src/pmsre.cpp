#include "gardin/pmsre.hpp"

#include <cstdio>
#include <fstream>

#include "gardin/error.hpp"

namespace gardin {

double block_mse(const GrayImage& real, const GrayImage& gen, int k) {
  require_valid(real, "block_mse");
  require_valid(gen, "block_mse");
  require_same_shape(real, gen, "block_mse");
  if (real.height != 64 || real.width != 64)
    throw ValidationError("block_mse: expected 64x64 images");
  if (k < 1 || k > 4) throw ValidationError("block_mse: block index must be in 1..4");
  const int by = ((k - 1) / 2) * 32;
  const int bx = ((k - 1) % 2) * 32;
  double sum = 0.0;
  for (int y = by; y < by + 32; ++y) {
    for (int x = bx; x < bx + 32; ++x) {
      const double d = real.at(y, x) - gen.at(y, x);
      sum += d * d;
    }
  }
  return sum / (32.0 * 32.0);
}

PmsreVector pmsre(const GrayImage& a, const GrayImage& a_gen, const GrayImage& s,
                  const GrayImage& s_gen) {
  PmsreVector v;
  for (int k = 1; k <= 4; ++k) {
    v.e[static_cast<size_t>(2 * (k - 1))] = block_mse(a, a_gen, k);
    v.e[static_cast<size_t>(2 * (k - 1) + 1)] = block_mse(s, s_gen, k);
  }
  return v;
}

void write_pmsre_csv(const std::filesystem::path& path, std::span<const PmsreRecord> records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot create " + path.string());
  out << "video_id,frame,region_idx,e1a,e1s,e2a,e2s,e3a,e3s,e4a,e4s\n";
  char buf[64];
  for (const auto& r : records) {
    out << r.video_id << "," << r.frame << "," << r.region_idx;
    for (double v : r.e.e) {
      std::snprintf(buf, sizeof(buf), ",%.17g", v);
      out << buf;
    }
    out << "\n";
  }
}

}  // namespace gardin
