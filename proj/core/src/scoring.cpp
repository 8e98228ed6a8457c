#include "gardin/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gardin/error.hpp"

namespace gardin {

FrameScoreSeries frame_scores(const std::vector<std::pair<int, double>>& region_scores,
                              int frame_count, const std::string& video_id) {
  if (frame_count < 1) throw ValidationError("frame_scores: frame_count must be >= 1");
  FrameScoreSeries out;
  out.video_id = video_id;
  out.scores.assign(static_cast<size_t>(frame_count), 0.0);
  for (const auto& [frame, score] : region_scores) {
    if (frame < 0 || frame >= frame_count)
      throw ValidationError("frame_scores: region frame " + std::to_string(frame) +
                            " outside 0.." + std::to_string(frame_count - 1));
    if (!std::isfinite(score)) throw ValidationError("frame_scores: non-finite score");
    out.scores[static_cast<size_t>(frame)] = std::max(out.scores[static_cast<size_t>(frame)], score);
  }
  return out;
}

FrameScoreSeries normalize_per_video(FrameScoreSeries series) {
  if (series.scores.empty()) throw ValidationError("normalize_per_video: empty series");
  const auto [mn_it, mx_it] = std::minmax_element(series.scores.begin(), series.scores.end());
  const double mn = *mn_it, mx = *mx_it;
  if (mx > mn) {
    const double inv = 1.0 / (mx - mn);
    for (double& s : series.scores) s = (s - mn) * inv;
  } else {
    std::fill(series.scores.begin(), series.scores.end(), 0.0);
  }
  series.normalized = true;
  return series;
}

namespace {

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

}  // namespace

FrameScoreSeries gaussian_smooth(FrameScoreSeries series, double sigma) {
  if (sigma <= 0.0) throw ValidationError("gaussian_smooth: sigma must be > 0");
  if (series.scores.empty()) throw ValidationError("gaussian_smooth: empty series");
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> kernel(static_cast<size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int o = -radius; o <= radius; ++o) {
    kernel[static_cast<size_t>(o + radius)] = std::exp(-0.5 * (o / sigma) * (o / sigma));
    sum += kernel[static_cast<size_t>(o + radius)];
  }
  for (double& k : kernel) k /= sum;

  const int n = static_cast<int>(series.scores.size());
  std::vector<double> out(series.scores.size());
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int o = -radius; o <= radius; ++o)
      acc += kernel[static_cast<size_t>(o + radius)] * series.scores[static_cast<size_t>(reflect_index(i + o, n))];
    out[static_cast<size_t>(i)] = acc;
  }
  series.scores = std::move(out);
  series.smoothed = true;
  return series;
}

double frame_level_auc(const std::vector<FrameScoreSeries>& all_series,
                       const std::vector<std::vector<int>>& all_labels) {
  if (all_series.size() != all_labels.size())
    throw ValidationError("frame_level_auc: series/label video counts differ");
  std::vector<double> scores;
  std::vector<int> labels;
  for (size_t v = 0; v < all_series.size(); ++v) {
    if (all_series[v].scores.size() != all_labels[v].size())
      throw ValidationError("frame_level_auc: length mismatch in video '" +
                            all_series[v].video_id + "'");
    scores.insert(scores.end(), all_series[v].scores.begin(), all_series[v].scores.end());
    labels.insert(labels.end(), all_labels[v].begin(), all_labels[v].end());
  }
  int64_t pos = 0, neg = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw ValidationError("frame_level_auc: labels must be 0/1");
    (l == 1 ? pos : neg) += 1;
  }
  if (pos == 0 || neg == 0)
    throw UndefinedAucError("frame_level_auc: ground truth contains a single class");

  // threshold sweep from the highest score down; trapezoids give tied
  // groups half credit
  std::vector<size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  double auc = 0.0;
  int64_t tp = 0, fp = 0, tp_prev = 0, fp_prev = 0;
  size_t i = 0;
  while (i < idx.size()) {
    const double threshold = scores[idx[i]];
    while (i < idx.size() && scores[idx[i]] == threshold) {
      (labels[idx[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    auc += static_cast<double>(fp - fp_prev) * static_cast<double>(tp + tp_prev) / 2.0;
    tp_prev = tp;
    fp_prev = fp;
  }
  return auc / (static_cast<double>(pos) * static_cast<double>(neg));
}

}  // namespace gardin
