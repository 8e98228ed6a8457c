#include "gardin/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gardin/checkpoint.hpp"
#include "gardin/error.hpp"
#include "gardin/manifest.hpp"
#include "gardin/scoring.hpp"
#include "gardin/synthetic.hpp"

namespace gardin::cli {
namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

uint64_t stage_seed(uint64_t seed, std::string_view stage) {
  return substream(seed, stage).next_u64();
}

void require_out_dir(const RunConfig& cfg) {
  if (cfg.out_dir.empty()) throw ValidationError("no output directory (set --out or out.dir)");
  std::filesystem::create_directories(cfg.out_dir);
}

void require_dataset(const RunConfig& cfg) {
  if (cfg.dataset_root.empty())
    throw ValidationError("no dataset directory (set dataset.root in the config)");
  if (!std::filesystem::is_directory(cfg.dataset_root))
    throw MissingArtifactError("dataset not found at " + cfg.dataset_root.string() +
                               " (run `synth` first)");
}

std::filesystem::path gardin_ckpt(const RunConfig& cfg) {
  return cfg.out_dir / "gardin_checkpoint.bin";
}
std::filesystem::path alrec_ckpt(const RunConfig& cfg) {
  return cfg.out_dir / "alrec_checkpoint.bin";
}

void write_gardin_log(const std::filesystem::path& path, const std::vector<GardinEpochLog>& log) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot create " + path.string());
  out << "epoch,lr,loss_as,loss_sa,loss_a,loss_s,gac,loss_d_s,loss_d_a,adv_g,probe_gac\n";
  for (const auto& r : log) {
    out << r.epoch << "," << fmt(r.lr) << "," << fmt(r.loss_as) << "," << fmt(r.loss_sa) << ","
        << fmt(r.loss_a) << "," << fmt(r.loss_s) << "," << fmt(r.gac) << "," << fmt(r.loss_d_s)
        << "," << fmt(r.loss_d_a) << "," << fmt(r.adv_g) << "," << fmt(r.probe_gac) << "\n";
  }
}

void write_alrec_log(const std::filesystem::path& path, const std::vector<AlrecEpochLog>& log) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot create " + path.string());
  out << "epoch,lr,loss_d,loss_g,mean_d_real,mean_d_fake\n";
  for (const auto& r : log) {
    out << r.epoch << "," << fmt(r.lr) << "," << fmt(r.loss_d) << "," << fmt(r.loss_g) << ","
        << fmt(r.mean_d_real) << "," << fmt(r.mean_d_fake) << "\n";
  }
}

struct TrainPairData {
  std::vector<PmsreVector> vectors;
  std::vector<PmsreRecord> records;
};

TrainPairData pmsre_of_pairs(const GardinModel& model, const RegionPairStream& stream) {
  std::vector<RegionPair> pairs(stream.size());
  for (size_t i = 0; i < stream.size(); ++i) pairs[i] = stream.pair(i);
  const auto gens = generate_for_pairs(model, pairs);
  TrainPairData out;
  out.vectors.resize(pairs.size());
  out.records.resize(pairs.size());
  std::map<std::pair<std::string, int>, int> region_counter;
  for (size_t i = 0; i < pairs.size(); ++i) {
    out.vectors[i] =
        pmsre(pairs[i].appearance, gens[i].a_hat, pairs[i].past_gradient, gens[i].s_hat);
    const auto key = std::make_pair(pairs[i].video_id, pairs[i].frame_index);
    out.records[i] = {pairs[i].video_id, pairs[i].frame_index, region_counter[key]++,
                      out.vectors[i]};
  }
  return out;
}

struct VideoScores {
  std::string video_id;
  std::vector<double> raw;
  std::vector<double> final_scores;
};

std::vector<VideoScores> score_split(const GardinModel& gardin_model,
                                     const ClassifierModel& alrec_model,
                                     const std::vector<VideoWithDetections>& split,
                                     const SamplingConfig& sampling, double sigma,
                                     std::vector<PmsreRecord>* records) {
  std::vector<VideoScores> out;
  for (const auto& v : split) {
    std::vector<RegionPair> pairs;
    for (const auto& det : v.detections) {
      if (det.frame_index >= static_cast<int>(v.video.frames.size())) continue;
      if (auto p = extract_region_pair(v.video, det, sampling)) pairs.push_back(std::move(*p));
    }
    const auto gens = generate_for_pairs(gardin_model, pairs);
    std::vector<std::pair<int, double>> region_scores;
    std::map<int, int> region_counter;
    for (size_t i = 0; i < pairs.size(); ++i) {
      const PmsreVector e =
          pmsre(pairs[i].appearance, gens[i].a_hat, pairs[i].past_gradient, gens[i].s_hat);
      const double s_e = score_region(alrec_model, e);
      region_scores.emplace_back(pairs[i].frame_index, s_e);
      if (records)
        records->push_back({v.video.video_id, pairs[i].frame_index,
                            region_counter[pairs[i].frame_index]++, e});
    }
    FrameScoreSeries raw = frame_scores(region_scores,
                                        static_cast<int>(v.video.frames.size()), v.video.video_id);
    FrameScoreSeries final_series = gaussian_smooth(normalize_per_video(raw), sigma);
    out.push_back({v.video.video_id, raw.scores, final_series.scores});
  }
  return out;
}

std::vector<std::pair<std::string, std::vector<int>>> load_test_labels(const RunConfig& cfg) {
  const auto split_dir = cfg.dataset_root / "test";
  if (!std::filesystem::is_directory(split_dir))
    throw MissingArtifactError("test split missing under " + cfg.dataset_root.string());
  std::vector<std::filesystem::path> dirs;
  for (const auto& e : std::filesystem::directory_iterator(split_dir))
    if (e.is_directory()) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  std::vector<std::pair<std::string, std::vector<int>>> out;
  for (const auto& d : dirs) {
    const auto path = d / "labels.txt";
    std::ifstream in(path);
    if (!in) throw MissingArtifactError("no labels.txt in " + d.string());
    std::vector<int> labels;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line == "\r") continue;
      labels.push_back(std::stoi(line));
    }
    out.emplace_back(d.filename().string(), std::move(labels));
  }
  return out;
}

double auc_of_scored_split(const std::vector<VideoScores>& scored,
                           const std::vector<std::pair<std::string, std::vector<int>>>& labels) {
  std::vector<FrameScoreSeries> series;
  std::vector<std::vector<int>> label_vecs;
  for (const auto& vs : scored) {
    const auto it = std::find_if(labels.begin(), labels.end(),
                                 [&](const auto& l) { return l.first == vs.video_id; });
    if (it == labels.end())
      throw ValidationError("no labels for video '" + vs.video_id + "'");
    FrameScoreSeries s;
    s.video_id = vs.video_id;
    s.scores = vs.final_scores;
    series.push_back(std::move(s));
    label_vecs.push_back(it->second);
  }
  return frame_level_auc(series, label_vecs);
}

}  // namespace

void cmd_synth(const RunConfig& cfg, bool force) {
  if (cfg.out_dir.empty()) throw ValidationError("no output directory (set --out or out.dir)");
  if (std::filesystem::exists(cfg.out_dir) && !std::filesystem::is_empty(cfg.out_dir) && !force)
    throw ValidationError("output directory " + cfg.out_dir.string() +
                          " is not empty; pass --force to overwrite");
  std::filesystem::create_directories(cfg.out_dir);

  const SynthSummary summary = generate_synthetic_dataset(cfg.synth, cfg.seed, cfg.out_dir);
  write_manifest(cfg.out_dir, "synth", cfg, {},
                 {"train/", "test/", "event_log.json"});

  int anomalies = 0;
  for (const auto& e : summary.events) anomalies += e.anomalous ? 1 : 0;
  std::printf("synth: %d train + %d test videos, %d frames, %d detections, "
              "%d anomalous sprites, %d positive frames\n",
              summary.train_videos, summary.test_videos, summary.frames, summary.detections,
              anomalies, summary.positive_frames);
  std::printf("dataset written to %s\n", cfg.out_dir.string().c_str());
}

void cmd_train_gardin(const RunConfig& cfg) {
  require_dataset(cfg);
  require_out_dir(cfg);
  RegionPairStream stream(cfg.dataset_root, "train", cfg.sampling,
                          stage_seed(cfg.seed, "train-gardin"));
  std::printf("train-gardin: %zu region pairs, %d epochs, batch %d, lr %g\n", stream.size(),
              cfg.gardin.epochs, cfg.gardin.batch, cfg.gardin.lr0);

  GardinTrainResult result = train_gardin(stream, cfg.gardin, stage_seed(cfg.seed, "train-gardin"));
  save_gardin_checkpoint(gardin_ckpt(cfg), *result.model);
  write_gardin_log(cfg.out_dir / "gardin_loss_log.csv", result.log);

  const double final_probe = result.log.empty() ? result.probe_gac_epoch0 : result.log.back().probe_gac;
  const json summary = {{"pairs", stream.size()},
                        {"epochs", cfg.gardin.epochs},
                        {"probe_gac_epoch0", result.probe_gac_epoch0},
                        {"probe_gac_final", final_probe},
                        {"distance", cfg.gardin.parts.to_string()},
                        {"losses", cfg.gardin.enabled.to_string()}};
  std::ofstream sum(cfg.out_dir / "gardin_summary.json");
  sum << summary.dump(2) << "\n";
  write_manifest(cfg.out_dir, "train-gardin", cfg, {cfg.dataset_root.string()},
                 {"gardin_checkpoint.bin", "gardin_loss_log.csv", "gardin_summary.json"});
  std::printf("train-gardin: probe L_GAC %.6f -> %.6f\n", result.probe_gac_epoch0, final_probe);
}

void cmd_train_alrec(const RunConfig& cfg) {
  require_dataset(cfg);
  require_out_dir(cfg);
  if (!std::filesystem::exists(gardin_ckpt(cfg)))
    throw MissingArtifactError("missing " + gardin_ckpt(cfg).string() +
                               " (run `train-gardin` first)");
  const auto model = load_gardin_checkpoint(gardin_ckpt(cfg));
  RegionPairStream stream(cfg.dataset_root, "train", cfg.sampling,
                          stage_seed(cfg.seed, "train-alrec"));
  const TrainPairData data = pmsre_of_pairs(*model, stream);
  write_pmsre_csv(cfg.out_dir / "pmsre_train.csv", data.records);
  std::printf("train-alrec: %zu PMSRE vectors, %d epochs, batch %d, lr %g\n", data.vectors.size(),
              cfg.alrec.epochs, cfg.alrec.batch, cfg.alrec.lr0);

  AlrecTrainResult result =
      train_alrec(data.vectors, cfg.alrec, cfg.focal, stage_seed(cfg.seed, "train-alrec"));
  save_alrec_checkpoint(alrec_ckpt(cfg), *result.model);
  write_alrec_log(cfg.out_dir / "alrec_loss_log.csv", result.log);

  const json summary = {{"vectors", data.vectors.size()},
                        {"epochs", cfg.alrec.epochs},
                        {"alpha", cfg.focal.alpha},
                        {"gamma", cfg.focal.gamma},
                        {"final_mean_d_real", result.log.empty() ? 0.0 : result.log.back().mean_d_real},
                        {"final_mean_d_fake", result.log.empty() ? 0.0 : result.log.back().mean_d_fake}};
  std::ofstream sum(cfg.out_dir / "alrec_summary.json");
  sum << summary.dump(2) << "\n";
  write_manifest(cfg.out_dir, "train-alrec", cfg,
                 {cfg.dataset_root.string(), gardin_ckpt(cfg).filename().string()},
                 {"alrec_checkpoint.bin", "alrec_loss_log.csv", "alrec_summary.json",
                  "pmsre_train.csv"});
  if (!result.log.empty())
    std::printf("train-alrec: final mean D(e) real %.4f, fake %.4f\n",
                result.log.back().mean_d_real, result.log.back().mean_d_fake);
}

void cmd_score(const RunConfig& cfg) {
  require_dataset(cfg);
  require_out_dir(cfg);
  if (!std::filesystem::exists(gardin_ckpt(cfg)))
    throw MissingArtifactError("missing " + gardin_ckpt(cfg).string() +
                               " (run `train-gardin` first)");
  if (!std::filesystem::exists(alrec_ckpt(cfg)))
    throw MissingArtifactError("missing " + alrec_ckpt(cfg).string() +
                               " (run `train-alrec` first)");
  const auto gardin_model = load_gardin_checkpoint(gardin_ckpt(cfg));
  const auto alrec_model = load_alrec_checkpoint(alrec_ckpt(cfg));
  const auto split = load_split(cfg.dataset_root, "test", cfg.sampling.min_confidence);

  std::vector<PmsreRecord> records;
  const auto scored =
      score_split(*gardin_model, *alrec_model, split, cfg.sampling, cfg.score_sigma, &records);
  write_pmsre_csv(cfg.out_dir / "pmsre_test.csv", records);

  const auto scores_path = cfg.out_dir / "scores.csv";
  std::ofstream out(scores_path);
  if (!out) throw IoError("cannot create " + scores_path.string());
  out << "video_id,frame,score_raw,score_final\n";
  size_t frames = 0;
  for (const auto& vs : scored) {
    for (size_t f = 0; f < vs.raw.size(); ++f, ++frames)
      out << vs.video_id << "," << f << "," << fmt(vs.raw[f]) << "," << fmt(vs.final_scores[f])
          << "\n";
  }
  write_manifest(cfg.out_dir, "score", cfg,
                 {cfg.dataset_root.string(), "gardin_checkpoint.bin", "alrec_checkpoint.bin"},
                 {"scores.csv", "pmsre_test.csv"});
  std::printf("score: %zu videos, %zu frames, %zu regions -> %s\n", scored.size(), frames,
              records.size(), scores_path.string().c_str());
}

void cmd_eval(const RunConfig& cfg) {
  require_dataset(cfg);
  require_out_dir(cfg);
  const auto scores_path = cfg.out_dir / "scores.csv";
  if (!std::filesystem::exists(scores_path))
    throw MissingArtifactError("missing " + scores_path.string() + " (run `score` first)");

  std::ifstream in(scores_path);
  std::string line;
  if (!std::getline(in, line) || line != "video_id,frame,score_raw,score_final")
    throw ParseError(scores_path.string() + ": unexpected header");
  std::vector<FrameScoreSeries> series;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string vid, frame_s, raw_s, final_s;
    if (!std::getline(row, vid, ',') || !std::getline(row, frame_s, ',') ||
        !std::getline(row, raw_s, ',') || !std::getline(row, final_s))
      throw ParseError(scores_path.string() + ":" + std::to_string(line_no) + ": bad row");
    if (series.empty() || series.back().video_id != vid) {
      series.push_back({vid, {}, true, true});
    }
    if (std::stoi(frame_s) != static_cast<int>(series.back().scores.size()))
      throw ParseError(scores_path.string() + ":" + std::to_string(line_no) +
                       ": frames out of order");
    series.back().scores.push_back(std::stod(final_s));
  }

  const auto labels = load_test_labels(cfg);
  std::vector<std::vector<int>> label_vecs;
  for (const auto& s : series) {
    const auto it = std::find_if(labels.begin(), labels.end(),
                                 [&](const auto& l) { return l.first == s.video_id; });
    if (it == labels.end()) throw ValidationError("no labels for video '" + s.video_id + "'");
    label_vecs.push_back(it->second);
  }
  const double auc = frame_level_auc(series, label_vecs);

  size_t n_frames = 0;
  for (const auto& s : series) n_frames += s.scores.size();
  const json record = {{"dataset", cfg.dataset_root.string()},
                       {"auc", auc},
                       {"n_frames", n_frames},
                       {"n_videos", series.size()}};
  std::ofstream out(cfg.out_dir / "auc.json");
  out << record.dump() << "\n";
  write_manifest(cfg.out_dir, "eval", cfg, {"scores.csv", cfg.dataset_root.string()},
                 {"auc.json"});
  std::printf("%s\n", record.dump().c_str());
}

void cmd_ablate(const RunConfig& cfg) {
  require_dataset(cfg);
  require_out_dir(cfg);

  RunConfig base = cfg;
  if (cfg.ablate_gardin_epochs > 0) base.gardin.epochs = cfg.ablate_gardin_epochs;
  if (cfg.ablate_alrec_epochs > 0) base.alrec.epochs = cfg.ablate_alrec_epochs;

  const auto split = load_split(cfg.dataset_root, "test", cfg.sampling.min_confidence);
  const auto labels = load_test_labels(cfg);
  RegionPairStream stream(cfg.dataset_root, "train", cfg.sampling, stage_seed(cfg.seed, "ablate"));

  auto run_once = [&](const GardinTrainConfig& gcfg) {
    GardinTrainResult g = train_gardin(stream, gcfg, stage_seed(cfg.seed, "ablate-gardin"));
    const TrainPairData data = pmsre_of_pairs(*g.model, stream);
    AlrecTrainResult a =
        train_alrec(data.vectors, base.alrec, base.focal, stage_seed(cfg.seed, "ablate-alrec"));
    const auto scored =
        score_split(*g.model, *a.model, split, cfg.sampling, cfg.score_sigma, nullptr);
    return auc_of_scored_split(scored, labels);
  };

  const std::vector<LossTerms> loss_rows = {
      {true, false, false, false}, {true, true, false, false},
      {true, true, true, false},   {true, true, true, true}};
  const std::vector<DistanceParts> dist_rows = {
      {true, false, false, false}, {true, true, false, false}, {false, false, true, false},
      {false, false, false, true}, {true, true, true, false},  {true, true, false, true},
      {true, true, true, true}};

  std::vector<std::pair<std::string, double>> results;

  std::printf("GARDiN loss ablation (distance: %s)\n", base.gardin.parts.to_string().c_str());
  std::printf("  L_AS L_SA L_A  L_S  |    AUC\n");
  for (const auto& terms : loss_rows) {
    GardinTrainConfig g = base.gardin;
    g.enabled = terms;
    const double auc = run_once(g);
    std::printf("  %-4s %-4s %-4s %-4s | %.4f\n", terms.as ? "x" : "-", terms.sa ? "x" : "-",
                terms.a ? "x" : "-", terms.s ? "x" : "-", auc);
    std::fflush(stdout);
    results.emplace_back("losses:" + terms.to_string(), auc);
  }

  std::printf("distance metric ablation (losses: %s)\n", base.gardin.enabled.to_string().c_str());
  std::printf("  d_l1 d_l2 d_ss d_nr |    AUC\n");
  for (const auto& parts : dist_rows) {
    GardinTrainConfig g = base.gardin;
    g.parts = parts;
    const double auc = run_once(g);
    std::printf("  %-4s %-4s %-4s %-4s | %.4f\n", parts.l1 ? "x" : "-", parts.l2 ? "x" : "-",
                parts.ss ? "x" : "-", parts.nr ? "x" : "-", auc);
    std::fflush(stdout);
    results.emplace_back("distance:" + parts.to_string(), auc);
  }

  const auto path = cfg.out_dir / "ablation.csv";
  std::ofstream out(path);
  if (!out) throw IoError("cannot create " + path.string());
  out << "axis,configuration,auc\n";
  for (const auto& [name, auc] : results) {
    const size_t colon = name.find(':');
    out << name.substr(0, colon) << "," << name.substr(colon + 1) << "," << fmt(auc) << "\n";
  }
  write_manifest(cfg.out_dir, "ablate", cfg, {cfg.dataset_root.string()}, {"ablation.csv"});
}

}  // namespace gardin::cli
