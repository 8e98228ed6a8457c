#pragma once

#include <string>
#include <utility>
#include <vector>

namespace gardin {

/// Per-frame anomaly scores of one video.
struct FrameScoreSeries {
  std::string video_id;
  std::vector<double> scores;
  bool normalized = false;
  bool smoothed = false;
};

/// s_f[t] = max over the region scores of frame t; frames without regions
/// score 0 (most normal).
FrameScoreSeries frame_scores(const std::vector<std::pair<int, double>>& region_scores,
                              int frame_count, const std::string& video_id = {});

/// Min-max normalization over the video; a constant series maps to all zeros.
FrameScoreSeries normalize_per_video(FrameScoreSeries series);

/// 1-D Gaussian smoothing, kernel truncated at 4*sigma and renormalized,
/// reflect padding (mirror without repeating the edge sample).
FrameScoreSeries gaussian_smooth(FrameScoreSeries series, double sigma = 10.0);

/// Frame-level ROC-AUC over the concatenation of all videos (threshold
/// sweep, trapezoidal, ties get half credit). Throws UndefinedAucError
/// when the ground truth has a single class.
double frame_level_auc(const std::vector<FrameScoreSeries>& all_series,
                       const std::vector<std::vector<int>>& all_labels);

}  // namespace gardin
