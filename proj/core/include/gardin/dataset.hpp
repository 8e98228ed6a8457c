#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gardin/image.hpp"

namespace gardin {

/// Axis-aligned box in frame coordinates, x1 < x2 and y1 < y2.
struct BoundingBox {
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;
};

struct Detection {
  int frame_index = 0;
  BoundingBox box;
  double confidence = 0.0;
  int class_id = 0;
};

/// One video: frames share a resolution; labels (when present) are one
/// 0/1 entry per frame, 1 marking an abnormal frame.
struct VideoSequence {
  std::string video_id;
  std::vector<GrayImage> frames;
  std::vector<int> frame_labels;  // empty when the video carries no ground truth

  bool has_labels() const { return !frame_labels.empty(); }
};

/// (appearance at frame t, Sobel gradient of the same box at frame t-T).
struct RegionPair {
  GrayImage appearance;
  GrayImage past_gradient;
  int frame_index = 0;
  BoundingBox box;
  std::string video_id;
};

struct SamplingConfig {
  int temporal_spacing = 3;      // T
  double min_confidence = 0.3;
  int region_size = 64;
};

/// Parses a detections CSV (header `frame,x1,y1,x2,y2,confidence,class_id`),
/// drops rows below min_confidence and returns the rest sorted by frame.
/// Malformed rows raise ParseError naming the file and line.
std::vector<Detection> load_detections(const std::filesystem::path& path, double min_confidence);

/// Clips a box to [0,w] x [0,h]. Clipping an in-bounds box is the identity.
BoundingBox clip_box(const BoundingBox& b, int frame_w, int frame_h);

/// Builds the training/inference sample for one detection, or nullopt when
/// the detection has no usable past frame (t < T) or the clipped box is
/// degenerate. The gradient image is computed at frame t-T using the
/// frame-t box: crop, resize to region_size, then Sobel.
std::optional<RegionPair> extract_region_pair(const VideoSequence& video, const Detection& det,
                                              const SamplingConfig& cfg);

/// Loads `<dir>/frame_%06d.png` (contiguous from 0) plus labels.txt when present.
VideoSequence load_video_sequence(const std::filesystem::path& video_dir);

struct VideoWithDetections {
  VideoSequence video;
  std::vector<Detection> detections;
};

/// Loads every video of `<root>/<split>/`, sorted by video id.
std::vector<VideoWithDetections> load_split(const std::filesystem::path& root,
                                            const std::string& split, double min_confidence);

/// Repeatable stream over every valid RegionPair of a split. Pairs are
/// extracted once; each epoch visits all of them in a seed-determined order.
class RegionPairStream {
 public:
  RegionPairStream(const std::vector<VideoWithDetections>& split, const SamplingConfig& cfg,
                   uint64_t shuffle_seed);
  /// Convenience: loads `<root>/<split>` first.
  RegionPairStream(const std::filesystem::path& root, const std::string& split,
                   const SamplingConfig& cfg, uint64_t shuffle_seed);

  size_t size() const { return pairs_.size(); }
  const RegionPair& pair(size_t i) const { return pairs_[i]; }

  /// Shuffled index order for one epoch; identical for identical
  /// (seed, epoch) regardless of how often it is called.
  std::vector<uint32_t> epoch_order(int epoch) const;

 private:
  void build(const std::vector<VideoWithDetections>& split, const SamplingConfig& cfg);
  std::vector<RegionPair> pairs_;
  uint64_t seed_;
};

}  // namespace gardin
