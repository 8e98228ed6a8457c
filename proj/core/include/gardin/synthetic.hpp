#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gardin {

/// Configuration of the synthetic moving-sprites dataset. Normal behaviour
/// is slow squares/disks drifting and bouncing; test videos additionally
/// contain anomalous sprites (fast movers or novel shapes) over a bounded
/// frame window.
struct SynthSpec {
  int frame_w = 128;
  int frame_h = 96;
  int train_videos = 4;
  int test_videos = 4;
  int frames_per_video = 80;
  int sprites_per_video = 3;

  std::vector<std::string> normal_kinds = {"square", "disk"};
  std::vector<std::string> anomaly_kinds = {"fast", "star"};
  int anomalies_per_test_video = 1;
  int anomaly_duration = 30;

  double normal_speed_min = 1.0;
  double normal_speed_max = 2.0;
  double anomaly_speed = 8.0;
  int sprite_size_min = 14;
  int sprite_size_max = 24;
  double background = 0.12;

  /// Earliest frame at which an anomaly window may open, leaving room for
  /// the pair extraction's temporal spacing at the window start.
  int temporal_margin() const { return 8; }
};

/// One sprite as recorded in the generator's event log.
struct SpriteEvent {
  std::string video_id;
  int sprite_id = 0;
  std::string kind;
  bool anomalous = false;
  int first_frame = 0;
  int last_frame = 0;  // inclusive
  double speed = 0.0;
  int size = 0;
  double intensity = 0.0;
};

struct SynthSummary {
  int train_videos = 0;
  int test_videos = 0;
  int frames = 0;
  int detections = 0;
  int positive_frames = 0;
  std::vector<SpriteEvent> events;
};

/// Writes the dataset under out_dir:
///   <out>/<split>/<video_id>/frame_%06d.png   8-bit grayscale frames
///   <out>/<split>/<video_id>/detections.csv   exact sprite boxes
///   <out>/<split>/<video_id>/labels.txt       one 0/1 per frame
///   <out>/event_log.json                      per-sprite ground truth
/// Fully deterministic in (spec, seed).
SynthSummary generate_synthetic_dataset(const SynthSpec& spec, uint64_t seed,
                                        const std::filesystem::path& out_dir);

}  // namespace gardin
