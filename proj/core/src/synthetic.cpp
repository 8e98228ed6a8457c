#include "gardin/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "gardin/error.hpp"
#include "gardin/image.hpp"
#include "gardin/png_io.hpp"
#include "gardin/rng.hpp"

namespace gardin {
namespace {

int class_id_for(const std::string& kind) {
  if (kind == "square") return 0;
  if (kind == "disk") return 1;
  if (kind == "fast") return 2;
  if (kind == "star") return 3;
  return 9;
}

struct Sprite {
  std::string kind;
  bool anomalous = false;
  int first_frame = 0, last_frame = 0;
  double speed = 0.0;
  int size = 0;
  double intensity = 0.0;
  double cx = 0.0, cy = 0.0, vx = 0.0, vy = 0.0;
};

void advance(Sprite& s, int frame_w, int frame_h) {
  const double half = s.size / 2.0;
  const double min_x = half + 1.0, max_x = frame_w - half - 2.0;
  const double min_y = half + 1.0, max_y = frame_h - half - 2.0;
  s.cx += s.vx;
  s.cy += s.vy;
  if (s.cx < min_x) { s.cx = 2.0 * min_x - s.cx; s.vx = -s.vx; }
  if (s.cx > max_x) { s.cx = 2.0 * max_x - s.cx; s.vx = -s.vx; }
  if (s.cy < min_y) { s.cy = 2.0 * min_y - s.cy; s.vy = -s.vy; }
  if (s.cy > max_y) { s.cy = 2.0 * max_y - s.cy; s.vy = -s.vy; }
}

void draw(GrayImage& frame, const Sprite& s) {
  const double half = s.size / 2.0;
  const int x1 = std::max(0, static_cast<int>(std::floor(s.cx - half)));
  const int y1 = std::max(0, static_cast<int>(std::floor(s.cy - half)));
  const int x2 = std::min(frame.width, static_cast<int>(std::ceil(s.cx + half)));
  const int y2 = std::min(frame.height, static_cast<int>(std::ceil(s.cy + half)));
  const double bar = s.size / 3.0;
  for (int y = y1; y < y2; ++y) {
    for (int x = x1; x < x2; ++x) {
      bool inside = false;
      if (s.kind == "disk") {
        const double dx = x + 0.5 - s.cx, dy = y + 0.5 - s.cy;
        inside = dx * dx + dy * dy <= half * half;
      } else if (s.kind == "star") {
        const double dx = std::abs(x + 0.5 - s.cx), dy = std::abs(y + 0.5 - s.cy);
        inside = dx <= bar / 2.0 || dy <= bar / 2.0;  // a plus/cross
      } else {  // square and fast movers
        inside = true;
      }
      if (inside) frame.at(y, x) = s.intensity;
    }
  }
}

Sprite make_normal_sprite(const SynthSpec& spec, Rng& rng, int frames) {
  Sprite s;
  s.kind = spec.normal_kinds[rng.below(static_cast<uint32_t>(spec.normal_kinds.size()))];
  s.anomalous = false;
  s.first_frame = 0;
  s.last_frame = frames - 1;
  s.speed = rng.uniform(spec.normal_speed_min, spec.normal_speed_max);
  s.size = spec.sprite_size_min +
           static_cast<int>(rng.below(static_cast<uint32_t>(spec.sprite_size_max - spec.sprite_size_min + 1)));
  s.intensity = rng.uniform(0.55, 0.95);
  const double half = s.size / 2.0;
  s.cx = rng.uniform(half + 2.0, spec.frame_w - half - 3.0);
  s.cy = rng.uniform(half + 2.0, spec.frame_h - half - 3.0);
  const double theta = rng.uniform(0.0, 2.0 * M_PI);
  s.vx = s.speed * std::cos(theta);
  s.vy = s.speed * std::sin(theta);
  return s;
}

Sprite make_anomalous_sprite(const SynthSpec& spec, Rng& rng, int frames, int kind_index) {
  Sprite s = make_normal_sprite(spec, rng, frames);
  s.kind = spec.anomaly_kinds[kind_index % spec.anomaly_kinds.size()];
  s.anomalous = true;
  if (s.kind == "fast") {
    s.speed = spec.anomaly_speed;
    const double theta = rng.uniform(0.0, 2.0 * M_PI);
    s.vx = s.speed * std::cos(theta);
    s.vy = s.speed * std::sin(theta);
  }
  const int margin = spec.temporal_margin();
  const int latest = frames - spec.anomaly_duration - 1;
  s.first_frame = margin + static_cast<int>(rng.below(static_cast<uint32_t>(
                               std::max(1, latest - margin + 1))));
  s.last_frame = std::min(frames - 1, s.first_frame + spec.anomaly_duration - 1);
  return s;
}

void write_video(const SynthSpec& spec, const std::filesystem::path& dir,
                 const std::string& video_id, std::vector<Sprite> sprites, SynthSummary& summary) {
  std::filesystem::create_directories(dir);
  std::ofstream det(dir / "detections.csv");
  if (!det) throw IoError("cannot create " + (dir / "detections.csv").string());
  det << "frame,x1,y1,x2,y2,confidence,class_id\n";
  std::vector<int> labels(spec.frames_per_video, 0);

  for (int t = 0; t < spec.frames_per_video; ++t) {
    GrayImage frame(spec.frame_h, spec.frame_w, spec.background);
    for (auto& s : sprites) {
      if (t < s.first_frame || t > s.last_frame) continue;
      if (t > s.first_frame) advance(s, spec.frame_w, spec.frame_h);
      draw(frame, s);
      const double half = s.size / 2.0;
      char row[160];
      std::snprintf(row, sizeof(row), "%d,%.2f,%.2f,%.2f,%.2f,%.2f,%d\n", t, s.cx - half,
                    s.cy - half, s.cx + half, s.cy + half, 0.95, class_id_for(s.kind));
      det << row;
      ++summary.detections;
      if (s.anomalous) labels[t] = 1;
    }
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%06d.png", t);
    write_png_gray(dir / name, frame);
    ++summary.frames;
  }

  std::ofstream lab(dir / "labels.txt");
  if (!lab) throw IoError("cannot create " + (dir / "labels.txt").string());
  for (int l : labels) {
    lab << l << "\n";
    summary.positive_frames += l;
  }

  for (size_t i = 0; i < sprites.size(); ++i) {
    const Sprite& s = sprites[i];
    summary.events.push_back({video_id, static_cast<int>(i), s.kind, s.anomalous, s.first_frame,
                              s.last_frame, s.speed, s.size, s.intensity});
  }
}

}  // namespace

SynthSummary generate_synthetic_dataset(const SynthSpec& spec, uint64_t seed,
                                        const std::filesystem::path& out_dir) {
  if (spec.frames_per_video < 1) throw ValidationError("synth: zero-length videos");
  if (spec.train_videos < 1 || spec.test_videos < 1)
    throw ValidationError("synth: need at least one video per split");
  if (spec.sprite_size_min < 4 || spec.sprite_size_max < spec.sprite_size_min)
    throw ValidationError("synth: bad sprite size range");
  if (spec.frame_w < spec.sprite_size_max + 8 || spec.frame_h < spec.sprite_size_max + 8)
    throw ValidationError("synth: frame too small for the largest sprite");
  if (spec.normal_kinds.empty()) throw ValidationError("synth: no normal sprite kinds");
  const bool with_anomalies = !spec.anomaly_kinds.empty() && spec.anomalies_per_test_video > 0;
  if (with_anomalies && spec.frames_per_video < spec.anomaly_duration + spec.temporal_margin() + 2)
    throw ValidationError("synth: videos too short for the anomaly window");

  SynthSummary summary;
  summary.train_videos = spec.train_videos;
  summary.test_videos = spec.test_videos;

  int video_counter = 0;
  int anomaly_kind_cursor = 0;
  for (const std::string split : {"train", "test"}) {
    const bool is_test = split == std::string("test");
    const int count = is_test ? spec.test_videos : spec.train_videos;
    for (int v = 0; v < count; ++v, ++video_counter) {
      Rng rng = substream(seed, "synth-video", static_cast<uint64_t>(video_counter));
      char vid[32];
      std::snprintf(vid, sizeof(vid), "video_%03d", v);
      std::vector<Sprite> sprites;
      for (int k = 0; k < spec.sprites_per_video; ++k)
        sprites.push_back(make_normal_sprite(spec, rng, spec.frames_per_video));
      if (is_test && with_anomalies) {
        for (int k = 0; k < spec.anomalies_per_test_video; ++k)
          sprites.push_back(
              make_anomalous_sprite(spec, rng, spec.frames_per_video, anomaly_kind_cursor++));
      }
      write_video(spec, out_dir / split / vid, vid, std::move(sprites), summary);
    }
  }

  nlohmann::json log = nlohmann::json::array();
  for (const auto& e : summary.events) {
    log.push_back({{"video_id", e.video_id},
                   {"sprite_id", e.sprite_id},
                   {"kind", e.kind},
                   {"anomalous", e.anomalous},
                   {"first_frame", e.first_frame},
                   {"last_frame", e.last_frame},
                   {"speed", e.speed},
                   {"size", e.size},
                   {"intensity", e.intensity}});
  }
  std::ofstream out(out_dir / "event_log.json");
  if (!out) throw IoError("cannot create " + (out_dir / "event_log.json").string());
  out << log.dump(2) << "\n";
  return summary;
}

}  // namespace gardin
