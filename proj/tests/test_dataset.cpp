#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gardin/dataset.hpp"
#include "gardin/error.hpp"
#include "gardin/imaging.hpp"
#include "gardin/rng.hpp"

using namespace gardin;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "gardin_dataset_test" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

// frames with a bright square sprite at a per-frame position
VideoSequence make_video(int frames, int h, int w,
                         const std::vector<std::pair<int, int>>& sprite_xy, int sprite = 10) {
  VideoSequence v;
  v.video_id = "vid";
  for (int t = 0; t < frames; ++t) {
    GrayImage frame(h, w, 0.1);
    const auto [sx, sy] = sprite_xy[static_cast<size_t>(t)];
    for (int y = sy; y < sy + sprite; ++y)
      for (int x = sx; x < sx + sprite; ++x)
        if (y >= 0 && y < h && x >= 0 && x < w) frame.at(y, x) = 0.9;
    v.frames.push_back(std::move(frame));
  }
  return v;
}

}  // namespace

TEST_CASE("load_detections filters by confidence and keeps frame order") {
  const auto dir = temp_dir("dets");
  write_file(dir / "d.csv",
             "frame,x1,y1,x2,y2,confidence,class_id\n"
             "4,1,1,5,5,0.5,0\n"
             "2,2,2,6,6,0.2,1\n"
             "1,0,0,3,3,0.9,0\n");
  const auto dets = load_detections(dir / "d.csv", 0.3);
  REQUIRE(dets.size() == 2);
  CHECK(dets[0].frame_index == 1);
  CHECK(dets[1].frame_index == 4);
  CHECK(dets[1].confidence == doctest::Approx(0.5));
}

TEST_CASE("load_detections on an empty file yields an empty list") {
  const auto dir = temp_dir("dets_empty");
  write_file(dir / "d.csv", "frame,x1,y1,x2,y2,confidence,class_id\n");
  CHECK(load_detections(dir / "d.csv", 0.3).empty());
}

TEST_CASE("malformed detection rows name the line") {
  const auto dir = temp_dir("dets_bad");
  write_file(dir / "d.csv",
             "frame,x1,y1,x2,y2,confidence,class_id\n"
             "0,5,1,5,5,0.5,0\n");  // x2 <= x1
  try {
    load_detections(dir / "d.csv", 0.0);
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  write_file(dir / "e.csv", "frame,x1,y1,x2,y2,confidence,class_id\n0,1,1,5,5,1.5,0\n");
  CHECK_THROWS_AS(load_detections(dir / "e.csv", 0.0), ParseError);
  write_file(dir / "f.csv", "frame,x1\n");
  CHECK_THROWS_AS(load_detections(dir / "f.csv", 0.0), ParseError);
  write_file(dir / "g.csv", "frame,x1,y1,x2,y2,confidence,class_id\n0,a,1,5,5,0.5,0\n");
  CHECK_THROWS_AS(load_detections(dir / "g.csv", 0.0), ParseError);
}

TEST_CASE("clip_box clamps to frame bounds and is idempotent in-bounds") {
  const BoundingBox inside{5.0, 6.0, 20.0, 21.0};
  const BoundingBox same = clip_box(inside, 100, 80);
  CHECK(same.x1 == inside.x1);
  CHECK(same.y2 == inside.y2);
  const BoundingBox big{-10.0, -5.0, 200.0, 90.0};
  const BoundingBox clipped = clip_box(big, 100, 80);
  CHECK(clipped.x1 == 0.0);
  CHECK(clipped.y1 == 0.0);
  CHECK(clipped.x2 == 100.0);
  CHECK(clipped.y2 == 80.0);
}

TEST_CASE("extract_region_pair: insufficient history yields none") {
  const VideoSequence v = make_video(5, 48, 48, {{10, 10}, {11, 10}, {12, 10}, {13, 10}, {14, 10}});
  Detection det;
  det.frame_index = 1;
  det.box = {10, 10, 24, 24};
  det.confidence = 1.0;
  const SamplingConfig cfg;
  CHECK_FALSE(extract_region_pair(v, det, cfg).has_value());
  det.frame_index = 4;
  CHECK(extract_region_pair(v, det, cfg).has_value());
  det.frame_index = 99;
  CHECK_THROWS_AS(extract_region_pair(v, det, cfg), ValidationError);
}

TEST_CASE("extract_region_pair: fully out-of-frame box yields none") {
  const VideoSequence v = make_video(5, 48, 48, {{10, 10}, {10, 10}, {10, 10}, {10, 10}, {10, 10}});
  Detection det;
  det.frame_index = 4;
  det.box = {-30, -30, -1, -1};
  CHECK_FALSE(extract_region_pair(v, det, SamplingConfig{}).has_value());
}

TEST_CASE("static scene: past gradient equals the Sobel of the current crop") {
  std::vector<std::pair<int, int>> still(6, {14, 12});
  const VideoSequence v = make_video(6, 48, 48, still);
  Detection det;
  det.frame_index = 5;
  det.box = {12, 10, 28, 26};
  const auto pair = extract_region_pair(v, det, SamplingConfig{});
  REQUIRE(pair.has_value());
  // appearance is the resized current crop; in a static scene the past crop
  // is identical, so the stored gradient must be its Sobel image
  const GrayImage expected = sobel_gradient(pair->appearance);
  for (size_t i = 0; i < pair->past_gradient.data.size(); ++i)
    CHECK(pair->past_gradient.data[i] == doctest::Approx(expected.data[i]).epsilon(1e-9));
}

TEST_CASE("moving sprite: edge energy in the past gradient is displaced") {
  // sprite moves +10 px/frame in x; at t the box is centered on the sprite,
  // at t-T (T=3) the sprite sits 30 px to the left, outside the crop
  std::vector<std::pair<int, int>> xy;
  for (int t = 0; t < 8; ++t) xy.emplace_back(10 + 10 * t, 20);
  const VideoSequence v = make_video(8, 64, 100, xy);
  Detection det;
  det.frame_index = 6;
  det.box = {70, 20, 80, 30};  // the sprite at frame 6 starts at x=70
  const auto pair = extract_region_pair(v, det, SamplingConfig{});
  REQUIRE(pair.has_value());
  double appearance_mean = 0.0, past_grad_mass = 0.0;
  for (double d : pair->appearance.data) appearance_mean += d;
  for (double d : pair->past_gradient.data) past_grad_mass += d;
  appearance_mean /= static_cast<double>(pair->appearance.pixels());
  CHECK(appearance_mean > 0.5);          // bright sprite fills the crop at t
  CHECK(past_grad_mass / 4096.0 < 0.01); // at t-3 the same box is empty background
}

TEST_CASE("region pair stream: size, determinism, empty-dataset error") {
  std::vector<std::pair<int, int>> still(8, {14, 12});
  VideoWithDetections v;
  v.video = make_video(8, 48, 48, still);
  v.video.video_id = "v0";
  for (int t : {3, 4, 5, 6, 7}) {
    Detection d;
    d.frame_index = t;
    d.box = {10, 8, 30, 28};
    d.confidence = 0.95;
    v.detections.push_back(d);
  }
  const std::vector<VideoWithDetections> split{v};
  RegionPairStream stream(split, SamplingConfig{}, 77);
  CHECK(stream.size() == 5);
  CHECK(stream.epoch_order(0) == stream.epoch_order(0));
  CHECK(stream.epoch_order(0) != stream.epoch_order(1));
  for (size_t i = 0; i < stream.size(); ++i) {
    CHECK(stream.pair(i).appearance.height == 64);
    CHECK(stream.pair(i).frame_index >= 3);
  }

  VideoWithDetections early = v;
  early.detections.clear();
  Detection d;
  d.frame_index = 0;
  d.box = {10, 8, 30, 28};
  early.detections.push_back(d);
  CHECK_THROWS_AS(RegionPairStream({early}, SamplingConfig{}, 1), ValidationError);
}
