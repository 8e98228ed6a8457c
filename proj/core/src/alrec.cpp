#include "gardin/alrec.hpp"

#include <algorithm>
#include <cmath>

#include "gardin/error.hpp"
#include "gardin/gardin.hpp"  // lr_at_epoch

namespace gardin {

namespace {
constexpr double kProbEps = 1e-7;
}

double focal_loss(double p, const FocalLossParams& params) {
  if (params.alpha <= 0.0 || params.gamma < 0.0)
    throw ValidationError("focal_loss: alpha > 0 and gamma >= 0 required");
  const double pc = std::clamp(p, kProbEps, 1.0 - kProbEps);
  return -params.alpha * std::pow(1.0 - pc, params.gamma) * std::log(pc);
}

namespace detail {

template <typename T>
Mlp<T>::Mlp(std::vector<int> widths, bool sigmoid_out, double dropout, double slope)
    : widths_(std::move(widths)), sigmoid_out_(sigmoid_out) {
  if (widths_.size() < 2) throw ValidationError("Mlp: need at least input and output widths");
  act_.slope = slope;
  drop_.p = dropout;
  dense_.resize(widths_.size() - 1);
  for (size_t i = 0; i + 1 < widths_.size(); ++i)
    dense_[i].configure(widths_[i], widths_[i + 1]);
}

template <typename T>
nn::Tensor<T> Mlp<T>::forward(nn::Tensor<T> x, Cache& c, bool train, Rng* rng) const {
  const size_t n = dense_.size();
  c.dense.resize(n);
  c.act.resize(n - 1);
  c.drop.resize(n - 1);
  nn::Tensor<T> h = std::move(x);
  for (size_t i = 0; i < n; ++i) {
    h = dense_[i].forward(std::move(h), c.dense[i]);
    if (i + 1 < n) {
      h = act_.forward(std::move(h), c.act[i]);
      h = drop_.forward(std::move(h), c.drop[i], train, rng);
    }
  }
  if (sigmoid_out_) h = out_.forward(std::move(h), c.out_act);
  return h;
}

template <typename T>
nn::Tensor<T> Mlp<T>::backward(const nn::Tensor<T>& gy, const Cache& c, bool need_gx) {
  const size_t n = dense_.size();
  nn::Tensor<T> g = sigmoid_out_ ? out_.backward(gy, c.out_act) : gy;
  for (size_t ir = 0; ir < n; ++ir) {
    const size_t i = n - 1 - ir;
    if (i + 1 < n) {
      g = drop_.backward(g, c.drop[i]);
      g = act_.backward(g, c.act[i]);
    }
    g = dense_[i].backward(g, c.dense[i], i > 0 || need_gx);
  }
  return need_gx ? g : nn::Tensor<T>();
}

template <typename T>
void Mlp<T>::collect(const std::string& prefix, std::vector<nn::ParamRef<T>>& out) {
  for (size_t i = 0; i < dense_.size(); ++i)
    dense_[i].collect(prefix + ".fc" + std::to_string(i), out);
}

template <typename T>
void Mlp<T>::init(Rng& rng) {
  std::vector<nn::ParamRef<T>> params;
  collect("m", params);
  for (auto& p : params) {
    if (p.name.size() > 1 && p.name.back() == 'w')
      nn::init_normal(*p.value, rng, 0.02);
    else
      p.value->zero();
  }
}

template class Mlp<float>;
template class Mlp<double>;

}  // namespace detail

namespace {

std::vector<int> gen_widths(const AlrecSpec& s) {
  std::vector<int> w{s.noise_dim};
  w.insert(w.end(), s.gen_hidden.begin(), s.gen_hidden.end());
  w.push_back(s.e_dim);
  return w;
}

std::vector<int> disc_widths(const AlrecSpec& s) {
  std::vector<int> w{s.e_dim};
  w.insert(w.end(), s.disc_hidden.begin(), s.disc_hidden.end());
  w.push_back(1);
  return w;
}

}  // namespace

ClassifierModel::ClassifierModel(const AlrecSpec& s)
    : spec(s),
      gen(gen_widths(s), /*sigmoid_out=*/false, s.dropout, s.lrelu_slope),
      disc(disc_widths(s), /*sigmoid_out=*/true, s.dropout, s.lrelu_slope) {}

void ClassifierModel::init_weights(uint64_t seed) {
  Rng rng = substream(seed, "weight-init");
  gen.init(rng);
  disc.init(rng);
}

std::vector<nn::ParamRef<float>> ClassifierModel::generator_params() {
  std::vector<nn::ParamRef<float>> p;
  gen.collect("gen", p);
  return p;
}

std::vector<nn::ParamRef<float>> ClassifierModel::discriminator_params() {
  std::vector<nn::ParamRef<float>> p;
  disc.collect("disc", p);
  return p;
}

namespace {

// d FL(clamp(p)) / dp; zero where the clamp is active.
double focal_grad(double p, const FocalLossParams& fl) {
  if (p <= kProbEps || p >= 1.0 - kProbEps) return 0.0;
  const double q = 1.0 - p;
  return fl.alpha * (fl.gamma * std::pow(q, fl.gamma - 1.0) * std::log(p) -
                     std::pow(q, fl.gamma) / p);
}

}  // namespace

AlrecTrainResult train_alrec(const std::vector<PmsreVector>& real_e, const AlrecTrainConfig& cfg,
                             const FocalLossParams& params, uint64_t seed) {
  if (real_e.empty()) throw ValidationError("train_alrec: no PMSRE vectors");
  if (cfg.batch < 1 || cfg.lr0 <= 0.0) throw ValidationError("train_alrec: bad config");

  AlrecTrainResult result;
  result.model = std::make_unique<ClassifierModel>();
  ClassifierModel& model = *result.model;
  model.init_weights(seed);
  const AlrecSpec& spec = model.spec;

  const auto g_params = model.generator_params();
  const auto d_params = model.discriminator_params();
  nn::Adam<float> adam_g(cfg.beta1, cfg.beta2);
  nn::Adam<float> adam_d(cfg.beta1, cfg.beta2);
  Rng noise_rng = substream(seed, "noise");
  Rng dropout_rng = substream(seed, "dropout");

  const size_t n = real_e.size();
  const double y_real = cfg.label_smooth;

  auto fill_noise = [&](int rows) {
    nn::Tensor<float> z({rows, spec.noise_dim});
    for (auto& v : z.v) v = static_cast<float>(noise_rng.normal());
    return z;
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at_epoch(cfg.lr0, epoch, cfg.epochs, cfg.decay_every);
    std::vector<uint32_t> order(n);
    for (uint32_t i = 0; i < n; ++i) order[i] = i;
    Rng shuffle_rng = substream(seed, "data-shuffle", static_cast<uint64_t>(epoch));
    shuffle(order, shuffle_rng);

    AlrecEpochLog row;
    row.epoch = epoch;
    row.lr = lr;
    double weight = 0.0;

    for (size_t begin = 0, batch_idx = 0; begin < n; begin += cfg.batch, ++batch_idx) {
      const size_t end = std::min(n, begin + cfg.batch);
      const int B = static_cast<int>(end - begin);
      nn::Tensor<float> e_real({B, spec.e_dim});
      for (int b = 0; b < B; ++b)
        for (int j = 0; j < spec.e_dim; ++j)
          e_real.v[static_cast<size_t>(b) * spec.e_dim + j] =
              static_cast<float>(real_e[order[begin + b]].e[static_cast<size_t>(j)]);

      // --- discriminator step ---
      nn::zero_grads(d_params);
      double loss_d = 0.0, mean_real = 0.0, mean_fake = 0.0;
      {
        detail::Mlp<float>::Cache c_d;
        nn::Tensor<float> p = model.disc.forward(e_real, c_d, true, &dropout_rng);
        nn::Tensor<float> gp(p.dims);
        for (int b = 0; b < B; ++b) {
          const double pb = p.v[static_cast<size_t>(b)];
          mean_real += pb;
          const double pt = y_real * pb + (1.0 - y_real) * (1.0 - pb);
          loss_d += focal_loss(pt, params) / B;
          gp.v[static_cast<size_t>(b)] =
              static_cast<float>(focal_grad(pt, params) * (2.0 * y_real - 1.0) / B);
        }
        model.disc.backward(gp, c_d, false);
      }
      {
        detail::Mlp<float>::Cache c_g, c_d;
        nn::Tensor<float> e_fake = model.gen.forward(fill_noise(B), c_g, true, &dropout_rng);
        nn::Tensor<float> p = model.disc.forward(std::move(e_fake), c_d, true, &dropout_rng);
        nn::Tensor<float> gp(p.dims);
        for (int b = 0; b < B; ++b) {
          const double pb = p.v[static_cast<size_t>(b)];
          mean_fake += pb;
          const double pt = 1.0 - pb;  // label 0 for generated e
          loss_d += focal_loss(pt, params) / B;
          gp.v[static_cast<size_t>(b)] = static_cast<float>(-focal_grad(pt, params) / B);
        }
        model.disc.backward(gp, c_d, false);
      }
      if (!std::isfinite(loss_d))
        throw NumericsError("non-finite L_D at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_idx));
      adam_d.step(d_params, lr);

      // --- generator step ---
      nn::zero_grads(g_params);
      double loss_g = 0.0;
      {
        detail::Mlp<float>::Cache c_g, c_d;
        nn::Tensor<float> e_fake = model.gen.forward(fill_noise(B), c_g, true, &dropout_rng);
        nn::Tensor<float> p = model.disc.forward(std::move(e_fake), c_d, true, &dropout_rng);
        nn::Tensor<float> gp(p.dims);
        for (int b = 0; b < B; ++b) {
          const double pb = p.v[static_cast<size_t>(b)];
          loss_g += focal_loss(pb, params) / B;  // non-saturating: push D(G(z)) -> 1
          gp.v[static_cast<size_t>(b)] = static_cast<float>(focal_grad(pb, params) / B);
        }
        const nn::Tensor<float> ge = model.disc.backward(gp, c_d, true);
        model.gen.backward(ge, c_g, false);
      }
      if (!std::isfinite(loss_g))
        throw NumericsError("non-finite L_G at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_idx));
      adam_g.step(g_params, lr);
      ++model.step;

      row.loss_d += B * loss_d;
      row.loss_g += B * loss_g;
      row.mean_d_real += mean_real;
      row.mean_d_fake += mean_fake;
      weight += B;
    }
    row.loss_d /= weight;
    row.loss_g /= weight;
    row.mean_d_real /= weight;
    row.mean_d_fake /= weight;
    result.log.push_back(row);
  }
  return result;
}

double score_region(const ClassifierModel& model, const PmsreVector& e) {
  for (double v : e.e)
    if (!std::isfinite(v)) throw ValidationError("score_region: non-finite component");
  nn::Tensor<float> x({1, model.spec.e_dim});
  for (int j = 0; j < model.spec.e_dim; ++j) x.v[static_cast<size_t>(j)] = static_cast<float>(e.e[static_cast<size_t>(j)]);
  detail::Mlp<float>::Cache c;
  const nn::Tensor<float> p = model.disc.forward(std::move(x), c, false, nullptr);
  return 1.0 - static_cast<double>(p.v[0]);
}

}  // namespace gardin
