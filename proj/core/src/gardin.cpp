#include "gardin/gardin.hpp"

#include <algorithm>
#include <cmath>

#include "gardin/error.hpp"

namespace gardin {
namespace detail {

template <typename T>
Generator<T>::Generator(const GeneratorSpec& spec) : spec_(spec) {
  const size_t L = spec.encoder_filters.size();
  if (L < 2 || spec.decoder_filters.size() != L)
    throw ValidationError("GeneratorSpec: encoder/decoder depth mismatch");
  if (spec.decoder_filters.back() != 1)
    throw ValidationError("GeneratorSpec: decoder must end in one channel");
  act_.slope = spec.lrelu_slope;

  int in_c = 1;
  enc_.resize(L);
  for (size_t i = 0; i < L; ++i) {
    nn::ConvGeom g;
    g.in_ch = in_c;
    g.out_ch = spec.encoder_filters[i];
    g.kernel = spec.kernel;
    enc_[i].configure(g);
    in_c = spec.encoder_filters[i];
  }
  enc_in_.resize(L - 1);  // the 1x1 bottleneck output is not normalized

  dec_.resize(L);
  for (size_t j = 0; j < L; ++j) {
    const int dec_in = j == 0 ? spec.encoder_filters.back()
                              : spec.decoder_filters[j - 1] + spec.encoder_filters[L - 1 - j];
    dec_[j].configure(dec_in, spec.decoder_filters[j]);
  }
  dec_in_.resize(L - 1);
}

template <typename T>
nn::Tensor<T> Generator<T>::forward(nn::Tensor<T> x, Cache& c) const {
  const size_t L = enc_.size();
  c.enc_conv.resize(L);
  c.enc_in.resize(L - 1);
  c.enc_act.resize(L);
  c.dec_conv.resize(L);
  c.dec_in.resize(L - 1);
  c.dec_act.resize(L - 1);
  c.skips.resize(L - 1);

  nn::Tensor<T> h = std::move(x);
  for (size_t i = 0; i < L; ++i) {
    h = enc_[i].forward(std::move(h), c.enc_conv[i]);
    if (i + 1 < L) h = enc_in_[i].forward(std::move(h), c.enc_in[i]);
    h = act_.forward(std::move(h), c.enc_act[i]);
    if (i + 1 < L) c.skips[i] = h;
  }
  for (size_t j = 0; j < L; ++j) {
    if (j > 0) h = nn::concat_channels(h, c.skips[L - 1 - j]);
    h = dec_[j].forward(std::move(h), c.dec_conv[j]);
    if (j + 1 < L) {
      h = dec_in_[j].forward(std::move(h), c.dec_in[j]);
      h = act_.forward(std::move(h), c.dec_act[j]);
    } else {
      h = out_.forward(std::move(h), c.out_act);
    }
  }
  return h;
}

template <typename T>
nn::Tensor<T> Generator<T>::backward(const nn::Tensor<T>& gy, const Cache& c, bool need_gx) {
  const size_t L = enc_.size();
  std::vector<nn::Tensor<T>> skip_grads(L - 1);

  nn::Tensor<T> g = out_.backward(gy, c.out_act);
  for (size_t jr = 0; jr < L; ++jr) {
    const size_t j = L - 1 - jr;
    if (j + 1 < L) {
      g = act_.backward(g, c.dec_act[j]);
      g = dec_in_[j].backward(g, c.dec_in[j]);
    }
    g = dec_[j].backward(g, c.dec_conv[j], true);
    if (j > 0) {
      nn::Tensor<T> g_prev, g_skip;
      nn::split_channels(g, spec_.decoder_filters[j - 1], g_prev, g_skip);
      skip_grads[L - 1 - j] = std::move(g_skip);
      g = std::move(g_prev);
    }
  }
  for (size_t ir = 0; ir < L; ++ir) {
    const size_t i = L - 1 - ir;
    g = act_.backward(g, c.enc_act[i]);
    if (i + 1 < L) g = enc_in_[i].backward(g, c.enc_in[i]);
    g = enc_[i].backward(g, c.enc_conv[i], i > 0 || need_gx);
    if (i > 0) nn::add_into(g, skip_grads[i - 1]);
  }
  return need_gx ? g : nn::Tensor<T>();
}

template <typename T>
void Generator<T>::collect(const std::string& prefix, std::vector<nn::ParamRef<T>>& out) {
  for (size_t i = 0; i < enc_.size(); ++i) enc_[i].collect(prefix + ".enc" + std::to_string(i), out);
  for (size_t j = 0; j < dec_.size(); ++j) dec_[j].collect(prefix + ".dec" + std::to_string(j), out);
}

template <typename T>
void Generator<T>::init(Rng& rng) {
  std::vector<nn::ParamRef<T>> params;
  collect("g", params);
  for (auto& p : params) {
    if (p.name.size() > 1 && p.name.back() == 'w')
      nn::init_normal(*p.value, rng, 0.02);
    else
      p.value->zero();
  }
}

template <typename T>
PatchDiscriminator<T>::PatchDiscriminator(const DiscriminatorSpec& spec) : spec_(spec) {
  act_.slope = spec.lrelu_slope;
  int in_c = 1;
  conv_.resize(spec.filters.size() + 1);
  for (size_t i = 0; i < spec.filters.size(); ++i) {
    nn::ConvGeom g;
    g.in_ch = in_c;
    g.out_ch = spec.filters[i];
    g.kernel = spec.kernel;
    conv_[i].configure(g);
    in_c = spec.filters[i];
  }
  // 1-stride conv onto the patch map; asymmetric padding keeps 4x4 -> 4x4
  nn::ConvGeom g;
  g.in_ch = in_c;
  g.out_ch = 1;
  g.kernel = spec.kernel;
  g.stride = 1;
  g.pad_t = g.pad_l = 1;
  g.pad_b = g.pad_r = 2;
  conv_.back().configure(g);
  in_.resize(spec.filters.size());
}

template <typename T>
nn::Tensor<T> PatchDiscriminator<T>::forward(nn::Tensor<T> x, Cache& c) const {
  const size_t L = in_.size();
  c.conv.resize(L + 1);
  c.in.resize(L);
  c.act.resize(L);
  nn::Tensor<T> h = std::move(x);
  for (size_t i = 0; i < L; ++i) {
    h = conv_[i].forward(std::move(h), c.conv[i]);
    h = in_[i].forward(std::move(h), c.in[i]);
    h = act_.forward(std::move(h), c.act[i]);
  }
  h = conv_.back().forward(std::move(h), c.conv[L]);
  return out_.forward(std::move(h), c.out_act);
}

template <typename T>
nn::Tensor<T> PatchDiscriminator<T>::backward(const nn::Tensor<T>& gy, const Cache& c,
                                              bool need_gx) {
  const size_t L = in_.size();
  nn::Tensor<T> g = out_.backward(gy, c.out_act);
  g = conv_.back().backward(g, c.conv[L], true);
  for (size_t ir = 0; ir < L; ++ir) {
    const size_t i = L - 1 - ir;
    g = act_.backward(g, c.act[i]);
    g = in_[i].backward(g, c.in[i]);
    g = conv_[i].backward(g, c.conv[i], i > 0 || need_gx);
  }
  return need_gx ? g : nn::Tensor<T>();
}

template <typename T>
void PatchDiscriminator<T>::collect(const std::string& prefix, std::vector<nn::ParamRef<T>>& out) {
  for (size_t i = 0; i + 1 < conv_.size(); ++i)
    conv_[i].collect(prefix + ".conv" + std::to_string(i), out);
  conv_.back().collect(prefix + ".out", out);
}

template <typename T>
void PatchDiscriminator<T>::init(Rng& rng) {
  std::vector<nn::ParamRef<T>> params;
  collect("d", params);
  for (auto& p : params) {
    if (p.name.size() > 1 && p.name.back() == 'w')
      nn::init_normal(*p.value, rng, 0.02);
    else
      p.value->zero();
  }
}

template class Generator<float>;
template class Generator<double>;
template class PatchDiscriminator<float>;
template class PatchDiscriminator<double>;

}  // namespace detail

void GardinModel::init_weights(uint64_t seed) {
  Rng rng = substream(seed, "weight-init");
  g_s.init(rng);
  g_a.init(rng);
  d_s.init(rng);
  d_a.init(rng);
}

std::vector<nn::ParamRef<float>> GardinModel::generator_params() {
  std::vector<nn::ParamRef<float>> p;
  g_s.collect("g_s", p);
  g_a.collect("g_a", p);
  return p;
}

std::vector<nn::ParamRef<float>> GardinModel::discriminator_params() {
  std::vector<nn::ParamRef<float>> p;
  d_s.collect("d_s", p);
  d_a.collect("d_a", p);
  return p;
}

namespace {

constexpr double kProbEps = 1e-7;

double clamp_prob(double p) { return std::clamp(p, kProbEps, 1.0 - kProbEps); }

nn::Tensor<float> image_to_tensor(const GrayImage& img) {
  nn::Tensor<float> t({1, 1, img.height, img.width});
  for (size_t i = 0; i < img.data.size(); ++i) t.v[i] = static_cast<float>(img.data[i]);
  return t;
}

void fill_slice(nn::Tensor<float>& batch, int b, const GrayImage& img) {
  const int64_t plane = static_cast<int64_t>(batch.dim(2)) * batch.dim(3);
  float* dst = batch.data() + b * plane;
  for (int64_t i = 0; i < plane; ++i) dst[i] = static_cast<float>(img.data[static_cast<size_t>(i)]);
}

GrayImage slice_to_image(const nn::Tensor<float>& t, int b) {
  GrayImage img(t.dim(2), t.dim(3));
  const int64_t plane = img.pixels();
  const float* src = t.data() + b * plane;
  for (int64_t i = 0; i < plane; ++i)
    img.data[static_cast<size_t>(i)] = std::clamp(static_cast<double>(src[i]), 0.0, 1.0);
  return img;
}

void require_region(const GrayImage& img, const char* what) {
  require_valid(img, what);
  if (img.height != 64 || img.width != 64)
    throw ValidationError(std::string(what) + ": expected 64x64 input");
}

}  // namespace

GrayImage generate_gradient(const GardinModel& model, const GrayImage& a) {
  require_region(a, "generate_gradient");
  detail::Generator<float>::Cache c;
  nn::Tensor<float> y = model.g_s.forward(image_to_tensor(a), c);
  return slice_to_image(y, 0);
}

GrayImage generate_appearance(const GardinModel& model, const GrayImage& s) {
  require_region(s, "generate_appearance");
  detail::Generator<float>::Cache c;
  nn::Tensor<float> y = model.g_a.forward(image_to_tensor(s), c);
  return slice_to_image(y, 0);
}

std::vector<GeneratedPair> generate_for_pairs(const GardinModel& model,
                                              const std::vector<RegionPair>& pairs, int batch) {
  if (batch < 1) throw ValidationError("generate_for_pairs: batch must be >= 1");
  std::vector<GeneratedPair> out(pairs.size());
  for (size_t begin = 0; begin < pairs.size(); begin += static_cast<size_t>(batch)) {
    const size_t end = std::min(pairs.size(), begin + static_cast<size_t>(batch));
    const int B = static_cast<int>(end - begin);
    nn::Tensor<float> a({B, 1, 64, 64}), s({B, 1, 64, 64});
    for (size_t i = begin; i < end; ++i) {
      require_region(pairs[i].appearance, "generate_for_pairs");
      require_region(pairs[i].past_gradient, "generate_for_pairs");
      fill_slice(a, static_cast<int>(i - begin), pairs[i].appearance);
      fill_slice(s, static_cast<int>(i - begin), pairs[i].past_gradient);
    }
    detail::Generator<float>::Cache c1, c2;
    const nn::Tensor<float> s_hat = model.g_s.forward(std::move(a), c1);
    const nn::Tensor<float> a_hat = model.g_a.forward(std::move(s), c2);
    for (size_t i = begin; i < end; ++i) {
      out[i].s_hat = slice_to_image(s_hat, static_cast<int>(i - begin));
      out[i].a_hat = slice_to_image(a_hat, static_cast<int>(i - begin));
    }
  }
  return out;
}

std::string LossTerms::to_string() const {
  std::string r;
  auto add = [&r](const char* name) {
    if (!r.empty()) r += ",";
    r += name;
  };
  if (as) add("as");
  if (sa) add("sa");
  if (a) add("a");
  if (s) add("s");
  return r.empty() ? "none" : r;
}

LossTerms LossTerms::parse(const std::string& str) {
  LossTerms t{false, false, false, false};
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    if (token == "as")
      t.as = true;
    else if (token == "sa")
      t.sa = true;
    else if (token == "a")
      t.a = true;
    else if (token == "s")
      t.s = true;
    else
      throw ValidationError("unknown loss term '" + token + "'");
    token.clear();
  };
  for (char c : str) {
    if (c == ',' || c == '+' || c == ' ')
      flush();
    else
      token += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  flush();
  return t;
}

ReconLosses reconstruction_losses_from(const GrayImage& s_hat, const GrayImage& a_hat,
                                       const GrayImage& a_cyc, const GrayImage& s_cyc,
                                       const GrayImage& a, const GrayImage& s,
                                       DistanceParts parts, LossTerms enabled) {
  ReconLosses out;
  if (enabled.as) out.as = distance(s_hat, s, parts);
  if (enabled.sa) out.sa = distance(a_hat, a, parts);
  if (enabled.a) out.a = distance(a_cyc, a, parts);
  if (enabled.s) out.s = distance(s_cyc, s, parts);
  return out;
}

ReconLosses reconstruction_losses(const GardinModel& model, const GrayImage& a, const GrayImage& s,
                                  DistanceParts parts, LossTerms enabled) {
  require_region(a, "reconstruction_losses");
  require_region(s, "reconstruction_losses");
  const GrayImage s_hat = generate_gradient(model, a);
  const GrayImage a_hat = generate_appearance(model, s);
  const GrayImage a_cyc = enabled.a ? generate_appearance(model, s_hat) : GrayImage(64, 64);
  const GrayImage s_cyc = enabled.s ? generate_gradient(model, a_hat) : GrayImage(64, 64);
  return reconstruction_losses_from(s_hat, a_hat, a_cyc, s_cyc, a, s, parts, enabled);
}

double gac_loss(const ReconLosses& losses, LossTerms enabled) {
  double total = 0.0;
  if (enabled.as) total += losses.as;
  if (enabled.sa) total += losses.sa;
  if (enabled.a) total += losses.a;
  if (enabled.s) total += losses.s;
  return total;
}

namespace {

double mean_log(const std::vector<double>& p) {
  double sum = 0.0;
  for (double v : p) sum += std::log(clamp_prob(v));
  return sum / static_cast<double>(p.size());
}

double mean_log1m(const std::vector<double>& p) {
  double sum = 0.0;
  for (double v : p) sum += std::log(1.0 - clamp_prob(v));
  return sum / static_cast<double>(p.size());
}

}  // namespace

AdvTerms adversarial_terms(const std::vector<double>& p_real_s, const std::vector<double>& p_fake_s,
                           const std::vector<double>& p_real_a,
                           const std::vector<double>& p_fake_a) {
  if (p_real_s.empty() || p_fake_s.empty() || p_real_a.empty() || p_fake_a.empty())
    throw ValidationError("adversarial_terms: empty probability set");
  AdvTerms t;
  t.d_s_term = mean_log(p_real_s) + mean_log1m(p_fake_s);
  t.d_a_term = mean_log(p_real_a) + mean_log1m(p_fake_a);
  return t;
}

AdvTerms adversarial_losses(const GardinModel& model, const GrayImage& a, const GrayImage& s) {
  require_region(a, "adversarial_losses");
  require_region(s, "adversarial_losses");
  detail::Generator<float>::Cache cg;
  detail::PatchDiscriminator<float>::Cache cd;
  auto patches = [&](nn::Tensor<float> t) {
    std::vector<double> out(t.v.begin(), t.v.end());
    return out;
  };
  const auto p_real_s = patches(model.d_s.forward(image_to_tensor(s), cd));
  const auto p_fake_s = patches(model.d_s.forward(model.g_s.forward(image_to_tensor(a), cg), cd));
  const auto p_real_a = patches(model.d_a.forward(image_to_tensor(a), cd));
  const auto p_fake_a = patches(model.d_a.forward(model.g_a.forward(image_to_tensor(s), cg), cd));
  return adversarial_terms(p_real_s, p_fake_s, p_real_a, p_fake_a);
}

double lr_at_epoch(double lr0, int epoch, int total_epochs, int decay_every) {
  if (decay_every < 1 || total_epochs < 1) throw ValidationError("lr schedule: bad arguments");
  const int block = (epoch / decay_every) * decay_every;
  const double f = 1.0 - static_cast<double>(block) / static_cast<double>(total_epochs);
  return lr0 * f * f;
}

namespace {

struct BatchTensors {
  nn::Tensor<float> a, s;
  int size = 0;
};

BatchTensors make_batch(const RegionPairStream& pairs, const std::vector<uint32_t>& order,
                        size_t begin, size_t end) {
  BatchTensors b;
  b.size = static_cast<int>(end - begin);
  b.a = nn::Tensor<float>({b.size, 1, 64, 64});
  b.s = nn::Tensor<float>({b.size, 1, 64, 64});
  for (size_t i = begin; i < end; ++i) {
    const RegionPair& p = pairs.pair(order[i]);
    fill_slice(b.a, static_cast<int>(i - begin), p.appearance);
    fill_slice(b.s, static_cast<int>(i - begin), p.past_gradient);
  }
  return b;
}

// Mean distance over the batch plus per-sample gradients scaled by 1/B,
// accumulated into g_gen.
double batch_distance_with_grad(const nn::Tensor<float>& gen, const nn::Tensor<float>& ref,
                                DistanceParts parts, nn::Tensor<float>* g_gen) {
  const int B = gen.dim(0);
  std::vector<double> values(static_cast<size_t>(B), 0.0);
  const int64_t plane = static_cast<int64_t>(gen.dim(2)) * gen.dim(3);
  parallel_for(B, [&](int64_t b0, int64_t b1) {
    for (int64_t b = b0; b < b1; ++b) {
      const GrayImage gi = slice_to_image(gen, static_cast<int>(b));
      const GrayImage ri = slice_to_image(ref, static_cast<int>(b));
      const DistanceGrad dg = distance_with_grad(gi, ri, parts);
      values[static_cast<size_t>(b)] = dg.value;
      if (g_gen) {
        float* dst = g_gen->data() + b * plane;
        const double scale = 1.0 / B;
        for (int64_t i = 0; i < plane; ++i)
          dst[i] += static_cast<float>(dg.grad.data[static_cast<size_t>(i)] * scale);
      }
    }
  });
  double mean = 0.0;
  for (double v : values) mean += v;
  return mean / B;
}

double batch_distance(const nn::Tensor<float>& gen, const nn::Tensor<float>& ref,
                      DistanceParts parts) {
  return batch_distance_with_grad(gen, ref, parts, nullptr);
}

void require_finite(double v, const char* term, int epoch, size_t batch_idx) {
  if (!std::isfinite(v))
    throw NumericsError(std::string("non-finite ") + term + " at epoch " + std::to_string(epoch) +
                        ", batch " + std::to_string(batch_idx));
}

// Patch-BCE gradient against a constant target; returns the loss and fills
// g (both normalized by the patch count).
double patch_bce(const nn::Tensor<float>& p, double target, nn::Tensor<float>* g) {
  const double m = static_cast<double>(p.size());
  double loss = 0.0;
  if (g) *g = nn::Tensor<float>(p.dims);
  for (int64_t i = 0; i < p.size(); ++i) {
    const double pc = clamp_prob(p.v[i]);
    loss -= (target * std::log(pc) + (1.0 - target) * std::log(1.0 - pc)) / m;
    if (g) g->v[i] = static_cast<float>(-(target / pc - (1.0 - target) / (1.0 - pc)) / m);
  }
  return loss;
}

double probe_gac_value(GardinModel& model, const BatchTensors& probe, const GardinTrainConfig& cfg) {
  detail::Generator<float>::Cache c1, c2, c3, c4;
  const nn::Tensor<float> s_hat = model.g_s.forward(probe.a, c1);
  const nn::Tensor<float> a_hat = model.g_a.forward(probe.s, c2);
  double total = 0.0;
  if (cfg.enabled.as) total += batch_distance(s_hat, probe.s, cfg.parts);
  if (cfg.enabled.sa) total += batch_distance(a_hat, probe.a, cfg.parts);
  if (cfg.enabled.a) total += batch_distance(model.g_a.forward(s_hat, c3), probe.a, cfg.parts);
  if (cfg.enabled.s) total += batch_distance(model.g_s.forward(a_hat, c4), probe.s, cfg.parts);
  return total;
}

}  // namespace

GardinTrainResult train_gardin(const RegionPairStream& pairs, const GardinTrainConfig& cfg,
                               uint64_t seed) {
  if (cfg.batch < 1 || cfg.lr0 <= 0.0) throw ValidationError("train_gardin: bad config");
  if (!cfg.enabled.any()) throw ValidationError("train_gardin: no reconstruction losses enabled");
  const size_t n = pairs.size();

  GardinTrainResult result;
  result.model = std::make_unique<GardinModel>();
  GardinModel& model = *result.model;
  model.init_weights(seed);

  const auto g_params = model.generator_params();
  const auto d_params = model.discriminator_params();
  nn::Adam<float> adam_g(cfg.beta1, cfg.beta2);
  nn::Adam<float> adam_d(cfg.beta1, cfg.beta2);

  // fixed probe batch: the first pairs in dataset order
  std::vector<uint32_t> probe_idx(std::min<size_t>(n, static_cast<size_t>(cfg.probe_size)));
  for (uint32_t i = 0; i < probe_idx.size(); ++i) probe_idx[i] = i;
  const BatchTensors probe = make_batch(pairs, probe_idx, 0, probe_idx.size());
  result.probe_gac_epoch0 = probe_gac_value(model, probe, cfg);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at_epoch(cfg.lr0, epoch, cfg.epochs, cfg.decay_every);
    const std::vector<uint32_t> order = pairs.epoch_order(epoch);

    GardinEpochLog row;
    row.epoch = epoch;
    row.lr = lr;
    double weight = 0.0;

    for (size_t begin = 0, batch_idx = 0; begin < n; begin += cfg.batch, ++batch_idx) {
      const size_t end = std::min(n, begin + cfg.batch);
      const BatchTensors batch = make_batch(pairs, order, begin, end);
      const double bw = static_cast<double>(end - begin);

      // generator forwards, shared by both phases
      detail::Generator<float>::Cache c_gs1, c_ga1, c_ga2, c_gs2;
      const nn::Tensor<float> s_hat = model.g_s.forward(batch.a, c_gs1);
      const nn::Tensor<float> a_hat = model.g_a.forward(batch.s, c_ga1);
      nn::Tensor<float> a_cyc, s_cyc;
      if (cfg.enabled.a) a_cyc = model.g_a.forward(s_hat, c_ga2);
      if (cfg.enabled.s) s_cyc = model.g_s.forward(a_hat, c_gs2);

      // --- discriminator step ---
      nn::zero_grads(d_params);
      double loss_d_s = 0.0, loss_d_a = 0.0;
      {
        detail::PatchDiscriminator<float>::Cache c_real, c_fake;
        nn::Tensor<float> p_real = model.d_s.forward(batch.s, c_real);
        nn::Tensor<float> p_fake = model.d_s.forward(s_hat, c_fake);  // detached fakes
        nn::Tensor<float> g_real, g_fake;
        loss_d_s = patch_bce(p_real, cfg.label_smooth, &g_real) + patch_bce(p_fake, 0.0, &g_fake);
        model.d_s.backward(g_real, c_real, false);
        model.d_s.backward(g_fake, c_fake, false);
      }
      {
        detail::PatchDiscriminator<float>::Cache c_real, c_fake;
        nn::Tensor<float> p_real = model.d_a.forward(batch.a, c_real);
        nn::Tensor<float> p_fake = model.d_a.forward(a_hat, c_fake);
        nn::Tensor<float> g_real, g_fake;
        loss_d_a = patch_bce(p_real, cfg.label_smooth, &g_real) + patch_bce(p_fake, 0.0, &g_fake);
        model.d_a.backward(g_real, c_real, false);
        model.d_a.backward(g_fake, c_fake, false);
      }
      require_finite(loss_d_s, "L_D_S", epoch, batch_idx);
      require_finite(loss_d_a, "L_D_A", epoch, batch_idx);
      adam_d.step(d_params, lr);

      // --- generator step (fresh discriminator forwards after the update) ---
      nn::zero_grads(g_params);
      nn::Tensor<float> g_s_hat(s_hat.dims);
      nn::Tensor<float> g_a_hat(a_hat.dims);

      ReconLosses recon;
      if (cfg.enabled.as)
        recon.as = batch_distance_with_grad(s_hat, batch.s, cfg.parts, &g_s_hat);
      if (cfg.enabled.sa)
        recon.sa = batch_distance_with_grad(a_hat, batch.a, cfg.parts, &g_a_hat);
      if (cfg.enabled.a) {
        nn::Tensor<float> g_a_cyc(a_cyc.dims);
        recon.a = batch_distance_with_grad(a_cyc, batch.a, cfg.parts, &g_a_cyc);
        const nn::Tensor<float> gx = model.g_a.backward(g_a_cyc, c_ga2, true);
        nn::add_into(g_s_hat, gx);
      }
      if (cfg.enabled.s) {
        nn::Tensor<float> g_s_cyc(s_cyc.dims);
        recon.s = batch_distance_with_grad(s_cyc, batch.s, cfg.parts, &g_s_cyc);
        const nn::Tensor<float> gx = model.g_s.backward(g_s_cyc, c_gs2, true);
        nn::add_into(g_a_hat, gx);
      }

      double adv_g = 0.0;
      {
        detail::PatchDiscriminator<float>::Cache c_d;
        nn::Tensor<float> p = model.d_s.forward(s_hat, c_d);
        nn::Tensor<float> gp;
        adv_g += patch_bce(p, 1.0, &gp);  // non-saturating generator objective
        const nn::Tensor<float> gx = model.d_s.backward(gp, c_d, true);
        nn::add_into(g_s_hat, gx);
      }
      {
        detail::PatchDiscriminator<float>::Cache c_d;
        nn::Tensor<float> p = model.d_a.forward(a_hat, c_d);
        nn::Tensor<float> gp;
        adv_g += patch_bce(p, 1.0, &gp);
        const nn::Tensor<float> gx = model.d_a.backward(gp, c_d, true);
        nn::add_into(g_a_hat, gx);
      }

      model.g_s.backward(g_s_hat, c_gs1, false);
      model.g_a.backward(g_a_hat, c_ga1, false);

      require_finite(recon.as, "L_AS", epoch, batch_idx);
      require_finite(recon.sa, "L_SA", epoch, batch_idx);
      require_finite(recon.a, "L_A", epoch, batch_idx);
      require_finite(recon.s, "L_S", epoch, batch_idx);
      require_finite(adv_g, "L_G_adv", epoch, batch_idx);
      adam_g.step(g_params, lr);
      ++model.step;

      row.loss_as += bw * recon.as;
      row.loss_sa += bw * recon.sa;
      row.loss_a += bw * recon.a;
      row.loss_s += bw * recon.s;
      row.gac += bw * gac_loss(recon, cfg.enabled);
      row.loss_d_s += bw * loss_d_s;
      row.loss_d_a += bw * loss_d_a;
      row.adv_g += bw * adv_g;
      weight += bw;
    }

    row.loss_as /= weight;
    row.loss_sa /= weight;
    row.loss_a /= weight;
    row.loss_s /= weight;
    row.gac /= weight;
    row.loss_d_s /= weight;
    row.loss_d_a /= weight;
    row.adv_g /= weight;
    row.probe_gac = probe_gac_value(model, probe, cfg);
    result.log.push_back(row);
  }
  return result;
}

}  // namespace gardin
