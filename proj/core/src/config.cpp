#include "gardin/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gardin/error.hpp"
#include "gardin/sha256.hpp"

namespace gardin {
namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return {};
  return s.substr(a, b - a + 1);
}

std::string join_kinds(const std::vector<std::string>& kinds) {
  std::string out;
  for (const auto& k : kinds) {
    if (!out.empty()) out += ",";
    out += k;
  }
  return out;
}

std::vector<std::string> split_kinds(const std::string& s) {
  std::vector<std::string> out;
  std::string token;
  for (char c : s) {
    if (c == ',' || c == ' ') {
      if (!token.empty()) out.push_back(token);
      token.clear();
    } else {
      token += c;
    }
  }
  if (!token.empty()) out.push_back(token);
  return out;
}

}  // namespace

KeyValues KeyValues::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str(), path.string());
}

KeyValues KeyValues::from_string(const std::string& text, const std::string& origin) {
  KeyValues kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(origin + ":" + std::to_string(line_no) + ": empty key");
    if (kv.values_.count(key))
      throw ParseError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    kv.values_[key] = value;
  }
  return kv;
}

std::string KeyValues::get_string(const std::string& key, const std::string& def) {
  consumed_[key] = true;
  auto it = values_.find(key);
  return it == values_.end() ? def : it->second;
}

int KeyValues::get_int(const std::string& key, int def) {
  consumed_[key] = true;
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  try {
    size_t pos = 0;
    const int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw ParseError(origin_ + ": key '" + key + "': not an integer: '" + it->second + "'");
  }
}

double KeyValues::get_double(const std::string& key, double def) {
  consumed_[key] = true;
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  try {
    size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size() || !std::isfinite(v)) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw ParseError(origin_ + ": key '" + key + "': not a number: '" + it->second + "'");
  }
}

uint64_t KeyValues::get_u64(const std::string& key, uint64_t def) {
  consumed_[key] = true;
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  try {
    size_t pos = 0;
    const uint64_t v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw ParseError(origin_ + ": key '" + key + "': not an unsigned integer: '" + it->second + "'");
  }
}

std::vector<std::string> KeyValues::unconsumed() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!consumed_.count(k)) out.push_back(k);
  return out;
}

RunConfig RunConfig::load(const std::filesystem::path& config_path,
                          std::optional<uint64_t> seed_override,
                          std::optional<std::filesystem::path> out_override) {
  KeyValues kv = config_path.empty() ? KeyValues::from_string("", "<empty>")
                                     : KeyValues::from_file(config_path);
  RunConfig c;
  c.seed = kv.get_u64("seed", c.seed);
  c.dataset_root = kv.get_string("dataset.root", "");
  c.out_dir = kv.get_string("out.dir", "");

  c.sampling.temporal_spacing = kv.get_int("sampling.temporal_spacing", 3);
  c.sampling.min_confidence = kv.get_double("sampling.min_confidence", 0.3);
  c.sampling.region_size = kv.get_int("sampling.region_size", 64);

  c.synth.frame_w = kv.get_int("synth.frame_w", c.synth.frame_w);
  c.synth.frame_h = kv.get_int("synth.frame_h", c.synth.frame_h);
  c.synth.train_videos = kv.get_int("synth.train_videos", c.synth.train_videos);
  c.synth.test_videos = kv.get_int("synth.test_videos", c.synth.test_videos);
  c.synth.frames_per_video = kv.get_int("synth.frames_per_video", c.synth.frames_per_video);
  c.synth.sprites_per_video = kv.get_int("synth.sprites_per_video", c.synth.sprites_per_video);
  c.synth.normal_kinds = split_kinds(kv.get_string("synth.normal_kinds", join_kinds(c.synth.normal_kinds)));
  c.synth.anomaly_kinds =
      split_kinds(kv.get_string("synth.anomaly_kinds", join_kinds(c.synth.anomaly_kinds)));
  c.synth.anomalies_per_test_video =
      kv.get_int("synth.anomalies_per_test_video", c.synth.anomalies_per_test_video);
  c.synth.anomaly_duration = kv.get_int("synth.anomaly_duration", c.synth.anomaly_duration);
  c.synth.normal_speed_min = kv.get_double("synth.normal_speed_min", c.synth.normal_speed_min);
  c.synth.normal_speed_max = kv.get_double("synth.normal_speed_max", c.synth.normal_speed_max);
  c.synth.anomaly_speed = kv.get_double("synth.anomaly_speed", c.synth.anomaly_speed);
  c.synth.sprite_size_min = kv.get_int("synth.sprite_size_min", c.synth.sprite_size_min);
  c.synth.sprite_size_max = kv.get_int("synth.sprite_size_max", c.synth.sprite_size_max);
  c.synth.background = kv.get_double("synth.background", c.synth.background);

  c.gardin.epochs = kv.get_int("gardin.epochs", 200);
  c.gardin.batch = kv.get_int("gardin.batch", 64);
  c.gardin.lr0 = kv.get_double("gardin.lr", 1e-2);
  c.gardin.decay_every = kv.get_int("gardin.decay_every", 25);
  c.gardin.beta1 = kv.get_double("gardin.beta1", 0.5);
  c.gardin.beta2 = kv.get_double("gardin.beta2", 0.999);
  c.gardin.label_smooth = kv.get_double("gardin.label_smooth", 0.9);
  c.gardin.parts = DistanceParts::parse(kv.get_string("gardin.distance", "l1,l2,ss"));
  c.gardin.enabled = LossTerms::parse(kv.get_string("gardin.losses", "as,sa,a,s"));
  c.gardin.probe_size = kv.get_int("gardin.probe_size", 64);

  c.alrec.epochs = kv.get_int("alrec.epochs", 50);
  c.alrec.batch = kv.get_int("alrec.batch", 256);
  c.alrec.lr0 = kv.get_double("alrec.lr", 1e-4);
  c.alrec.decay_every = kv.get_int("alrec.decay_every", 10);
  c.alrec.beta1 = kv.get_double("alrec.beta1", 0.5);
  c.alrec.beta2 = kv.get_double("alrec.beta2", 0.999);
  c.alrec.label_smooth = kv.get_double("alrec.label_smooth", 0.9);
  c.focal.alpha = kv.get_double("alrec.alpha", 0.1);
  c.focal.gamma = kv.get_double("alrec.gamma", 10.0);

  c.score_sigma = kv.get_double("scoring.sigma", 10.0);
  c.ablate_gardin_epochs = kv.get_int("ablate.gardin_epochs", 0);
  c.ablate_alrec_epochs = kv.get_int("ablate.alrec_epochs", 0);

  const auto unknown = kv.unconsumed();
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : unknown) msg += " '" + k + "'";
    throw ParseError(msg);
  }

  if (seed_override) c.seed = *seed_override;
  if (out_override) c.out_dir = *out_override;

  if (c.sampling.temporal_spacing < 1)
    throw ValidationError("sampling.temporal_spacing must be >= 1");
  if (c.sampling.min_confidence < 0.0 || c.sampling.min_confidence > 1.0)
    throw ValidationError("sampling.min_confidence must be in [0,1]");
  if (c.sampling.region_size != 64)
    throw ValidationError("sampling.region_size is fixed at 64 by the pipeline contract");
  if (c.gardin.epochs < 1 || c.gardin.batch < 1 || c.gardin.lr0 <= 0.0 ||
      c.gardin.decay_every < 1)
    throw ValidationError("bad gardin.* training parameters");
  if (c.alrec.epochs < 1 || c.alrec.batch < 1 || c.alrec.lr0 <= 0.0 || c.alrec.decay_every < 1)
    throw ValidationError("bad alrec.* training parameters");
  if (c.focal.alpha <= 0.0 || c.focal.gamma < 0.0)
    throw ValidationError("alrec.alpha must be > 0, alrec.gamma >= 0");
  if (c.score_sigma <= 0.0) throw ValidationError("scoring.sigma must be > 0");
  if (!c.gardin.parts.any()) throw ValidationError("gardin.distance selects no parts");
  if (!c.gardin.enabled.any()) throw ValidationError("gardin.losses selects no terms");
  return c;
}

std::string RunConfig::canonical_string() const {
  char buf[64];
  std::ostringstream out;
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  // out_dir is deliberately excluded: where artifacts land is environment,
  // not behaviour, and identical runs into different directories must
  // produce identical trees
  out << "seed=" << seed << "\n";
  out << "dataset.root=" << dataset_root.string() << "\n";
  out << "sampling.temporal_spacing=" << sampling.temporal_spacing << "\n";
  out << "sampling.min_confidence=" << num(sampling.min_confidence) << "\n";
  out << "sampling.region_size=" << sampling.region_size << "\n";
  out << "synth.frame_w=" << synth.frame_w << "\n";
  out << "synth.frame_h=" << synth.frame_h << "\n";
  out << "synth.train_videos=" << synth.train_videos << "\n";
  out << "synth.test_videos=" << synth.test_videos << "\n";
  out << "synth.frames_per_video=" << synth.frames_per_video << "\n";
  out << "synth.sprites_per_video=" << synth.sprites_per_video << "\n";
  out << "synth.normal_kinds=" << join_kinds(synth.normal_kinds) << "\n";
  out << "synth.anomaly_kinds=" << join_kinds(synth.anomaly_kinds) << "\n";
  out << "synth.anomalies_per_test_video=" << synth.anomalies_per_test_video << "\n";
  out << "synth.anomaly_duration=" << synth.anomaly_duration << "\n";
  out << "synth.normal_speed_min=" << num(synth.normal_speed_min) << "\n";
  out << "synth.normal_speed_max=" << num(synth.normal_speed_max) << "\n";
  out << "synth.anomaly_speed=" << num(synth.anomaly_speed) << "\n";
  out << "synth.sprite_size_min=" << synth.sprite_size_min << "\n";
  out << "synth.sprite_size_max=" << synth.sprite_size_max << "\n";
  out << "synth.background=" << num(synth.background) << "\n";
  out << "gardin.epochs=" << gardin.epochs << "\n";
  out << "gardin.batch=" << gardin.batch << "\n";
  out << "gardin.lr=" << num(gardin.lr0) << "\n";
  out << "gardin.decay_every=" << gardin.decay_every << "\n";
  out << "gardin.beta1=" << num(gardin.beta1) << "\n";
  out << "gardin.beta2=" << num(gardin.beta2) << "\n";
  out << "gardin.label_smooth=" << num(gardin.label_smooth) << "\n";
  out << "gardin.distance=" << gardin.parts.to_string() << "\n";
  out << "gardin.losses=" << gardin.enabled.to_string() << "\n";
  out << "gardin.probe_size=" << gardin.probe_size << "\n";
  out << "alrec.epochs=" << alrec.epochs << "\n";
  out << "alrec.batch=" << alrec.batch << "\n";
  out << "alrec.lr=" << num(alrec.lr0) << "\n";
  out << "alrec.decay_every=" << alrec.decay_every << "\n";
  out << "alrec.beta1=" << num(alrec.beta1) << "\n";
  out << "alrec.beta2=" << num(alrec.beta2) << "\n";
  out << "alrec.label_smooth=" << num(alrec.label_smooth) << "\n";
  out << "alrec.alpha=" << num(focal.alpha) << "\n";
  out << "alrec.gamma=" << num(focal.gamma) << "\n";
  out << "scoring.sigma=" << num(score_sigma) << "\n";
  out << "ablate.gardin_epochs=" << ablate_gardin_epochs << "\n";
  out << "ablate.alrec_epochs=" << ablate_alrec_epochs << "\n";
  return out.str();
}

std::string RunConfig::hash() const { return sha256_hex(canonical_string()); }

}  // namespace gardin
