#include "gardin/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gardin/error.hpp"
#include "gardin/imaging.hpp"
#include "gardin/png_io.hpp"
#include "gardin/rng.hpp"

namespace gardin {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where + ": not a number: '" + s + "'");
  }
}

int parse_int(const std::string& s, const std::string& where) {
  try {
    size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where + ": not an integer: '" + s + "'");
  }
}

}  // namespace

std::vector<Detection> load_detections(const std::filesystem::path& path, double min_confidence) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::vector<Detection> dets;
  std::string line;
  int line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    if (line.empty() || line == "\r") continue;
    if (!saw_header) {
      std::string stripped = line;
      stripped.erase(std::remove(stripped.begin(), stripped.end(), '\r'), stripped.end());
      if (stripped != "frame,x1,y1,x2,y2,confidence,class_id")
        throw ParseError(where + ": unexpected header '" + stripped + "'");
      saw_header = true;
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != 7) throw ParseError(where + ": expected 7 fields, got " +
                                             std::to_string(fields.size()));
    Detection d;
    d.frame_index = parse_int(fields[0], where);
    d.box = {parse_double(fields[1], where), parse_double(fields[2], where),
             parse_double(fields[3], where), parse_double(fields[4], where)};
    d.confidence = parse_double(fields[5], where);
    d.class_id = parse_int(fields[6], where);
    if (d.frame_index < 0) throw ParseError(where + ": negative frame index");
    if (!(d.box.x1 < d.box.x2) || !(d.box.y1 < d.box.y2))
      throw ParseError(where + ": degenerate box (x1 < x2 and y1 < y2 required)");
    if (d.confidence < 0.0 || d.confidence > 1.0)
      throw ParseError(where + ": confidence outside [0,1]");
    if (d.confidence >= min_confidence) dets.push_back(d);
  }
  std::stable_sort(dets.begin(), dets.end(),
                   [](const Detection& a, const Detection& b) { return a.frame_index < b.frame_index; });
  return dets;
}

BoundingBox clip_box(const BoundingBox& b, int frame_w, int frame_h) {
  BoundingBox c;
  c.x1 = std::clamp(b.x1, 0.0, static_cast<double>(frame_w));
  c.x2 = std::clamp(b.x2, 0.0, static_cast<double>(frame_w));
  c.y1 = std::clamp(b.y1, 0.0, static_cast<double>(frame_h));
  c.y2 = std::clamp(b.y2, 0.0, static_cast<double>(frame_h));
  return c;
}

namespace {

GrayImage crop(const GrayImage& frame, const BoundingBox& clipped) {
  const int x1 = static_cast<int>(std::floor(clipped.x1));
  const int y1 = static_cast<int>(std::floor(clipped.y1));
  const int x2 = std::min(frame.width, static_cast<int>(std::ceil(clipped.x2)));
  const int y2 = std::min(frame.height, static_cast<int>(std::ceil(clipped.y2)));
  if (x2 - x1 < 1 || y2 - y1 < 1) return {};
  GrayImage out(y2 - y1, x2 - x1);
  for (int y = y1; y < y2; ++y)
    for (int x = x1; x < x2; ++x) out.at(y - y1, x - x1) = frame.at(y, x);
  return out;
}

}  // namespace

std::optional<RegionPair> extract_region_pair(const VideoSequence& video, const Detection& det,
                                              const SamplingConfig& cfg) {
  if (det.frame_index >= static_cast<int>(video.frames.size()))
    throw ValidationError("extract_region_pair: frame index " + std::to_string(det.frame_index) +
                          " beyond video '" + video.video_id + "'");
  const int t = det.frame_index;
  if (t < cfg.temporal_spacing) return std::nullopt;

  const GrayImage& now = video.frames[t];
  const GrayImage& past = video.frames[t - cfg.temporal_spacing];
  const BoundingBox clipped = clip_box(det.box, now.width, now.height);
  if (!(clipped.x1 < clipped.x2) || !(clipped.y1 < clipped.y2)) return std::nullopt;

  const GrayImage now_crop = crop(now, clipped);
  const GrayImage past_crop = crop(past, clipped);
  if (now_crop.empty() || past_crop.empty()) return std::nullopt;

  RegionPair pair;
  pair.appearance = resize_bilinear(now_crop, cfg.region_size, cfg.region_size);
  pair.past_gradient = sobel_gradient(resize_bilinear(past_crop, cfg.region_size, cfg.region_size));
  pair.frame_index = t;
  pair.box = clipped;
  pair.video_id = video.video_id;
  return pair;
}

VideoSequence load_video_sequence(const std::filesystem::path& video_dir) {
  if (!std::filesystem::is_directory(video_dir))
    throw IoError("video directory missing: " + video_dir.string());
  VideoSequence v;
  v.video_id = video_dir.filename().string();
  for (int i = 0;; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%06d.png", i);
    const auto p = video_dir / name;
    if (!std::filesystem::exists(p)) break;
    v.frames.push_back(read_png_as_gray(p));
    if (v.frames.back().height != v.frames.front().height ||
        v.frames.back().width != v.frames.front().width)
      throw ValidationError(v.video_id + ": frames change resolution at index " +
                            std::to_string(i));
  }
  if (v.frames.empty()) throw IoError("no frames found under " + video_dir.string());

  const auto labels_path = video_dir / "labels.txt";
  if (std::filesystem::exists(labels_path)) {
    std::ifstream in(labels_path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      const int lab = parse_int(line.substr(0, line.find('\r')),
                                labels_path.string() + ":" + std::to_string(line_no));
      if (lab != 0 && lab != 1)
        throw ParseError(labels_path.string() + ":" + std::to_string(line_no) +
                         ": label must be 0 or 1");
      v.frame_labels.push_back(lab);
    }
    if (v.frame_labels.size() != v.frames.size())
      throw ValidationError(v.video_id + ": " + std::to_string(v.frame_labels.size()) +
                            " labels for " + std::to_string(v.frames.size()) + " frames");
  }
  return v;
}

std::vector<VideoWithDetections> load_split(const std::filesystem::path& root,
                                            const std::string& split, double min_confidence) {
  const auto split_dir = root / split;
  if (!std::filesystem::is_directory(split_dir))
    throw IoError("split directory missing: " + split_dir.string());

  std::vector<std::filesystem::path> dirs;
  for (const auto& e : std::filesystem::directory_iterator(split_dir))
    if (e.is_directory()) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());

  std::vector<VideoWithDetections> out;
  for (const auto& d : dirs) {
    VideoWithDetections v;
    v.video = load_video_sequence(d);
    v.detections = load_detections(d / "detections.csv", min_confidence);
    out.push_back(std::move(v));
  }
  if (out.empty()) throw IoError("no videos under " + split_dir.string());
  return out;
}

RegionPairStream::RegionPairStream(const std::vector<VideoWithDetections>& split,
                                   const SamplingConfig& cfg, uint64_t shuffle_seed)
    : seed_(shuffle_seed) {
  build(split, cfg);
}

RegionPairStream::RegionPairStream(const std::filesystem::path& root, const std::string& split,
                                   const SamplingConfig& cfg, uint64_t shuffle_seed)
    : seed_(shuffle_seed) {
  build(load_split(root, split, cfg.min_confidence), cfg);
}

void RegionPairStream::build(const std::vector<VideoWithDetections>& split,
                             const SamplingConfig& cfg) {
  for (const auto& v : split) {
    for (const auto& det : v.detections) {
      if (det.frame_index >= static_cast<int>(v.video.frames.size())) continue;
      if (auto pair = extract_region_pair(v.video, det, cfg)) pairs_.push_back(std::move(*pair));
    }
  }
  if (pairs_.empty())
    throw ValidationError("no valid region pairs in dataset (all detections filtered, "
                          "too early, or degenerate)");
}

std::vector<uint32_t> RegionPairStream::epoch_order(int epoch) const {
  std::vector<uint32_t> order(pairs_.size());
  for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng = substream(seed_, "data-shuffle", static_cast<uint64_t>(epoch));
  shuffle(order, rng);
  return order;
}

}  // namespace gardin
