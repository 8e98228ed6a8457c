#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gardin/dataset.hpp"
#include "gardin/image.hpp"
#include "gardin/imaging.hpp"
#include "gardin/nn.hpp"

namespace gardin {

/// U-net-like generator: 6 stride-2 4x4 convolutions down to a 1x1
/// bottleneck, 6 stride-2 transposed convolutions back up, skip
/// concatenations at the five interior resolutions, sigmoid output.
struct GeneratorSpec {
  std::vector<int> encoder_filters{32, 64, 128, 256, 256, 256};
  std::vector<int> decoder_filters{256, 256, 128, 64, 32, 1};
  int kernel = 4;
  double lrelu_slope = 0.2;
};

/// PatchGAN discriminator: 4 stride-2 4x4 convolutions, then a 1-stride
/// convolution onto a 4x4x1 sigmoid patch map.
struct DiscriminatorSpec {
  std::vector<int> filters{32, 64, 128, 256};
  int kernel = 4;
  double lrelu_slope = 0.2;
};

namespace detail {

template <typename T>
class Generator {
 public:
  explicit Generator(const GeneratorSpec& spec);

  struct Cache {
    std::vector<typename nn::Conv2d<T>::Cache> enc_conv;
    std::vector<typename nn::InstanceNorm<T>::Cache> enc_in;
    std::vector<typename nn::LeakyReLU<T>::Cache> enc_act;
    std::vector<typename nn::ConvTranspose2d<T>::Cache> dec_conv;
    std::vector<typename nn::InstanceNorm<T>::Cache> dec_in;
    std::vector<typename nn::LeakyReLU<T>::Cache> dec_act;
    typename nn::Sigmoid<T>::Cache out_act;
    std::vector<nn::Tensor<T>> skips;
  };

  /// x: [B,1,64,64] -> [B,1,64,64], values in (0,1).
  nn::Tensor<T> forward(nn::Tensor<T> x, Cache& c) const;
  /// Accumulates parameter gradients; returns d(loss)/d(input) when need_gx.
  nn::Tensor<T> backward(const nn::Tensor<T>& gy, const Cache& c, bool need_gx);

  void collect(const std::string& prefix, std::vector<nn::ParamRef<T>>& out);
  void init(Rng& rng);
  const GeneratorSpec& spec() const { return spec_; }

 private:
  GeneratorSpec spec_;
  std::vector<nn::Conv2d<T>> enc_;
  std::vector<nn::InstanceNorm<T>> enc_in_;
  std::vector<nn::ConvTranspose2d<T>> dec_;
  std::vector<nn::InstanceNorm<T>> dec_in_;
  nn::LeakyReLU<T> act_;
  nn::Sigmoid<T> out_;
};

template <typename T>
class PatchDiscriminator {
 public:
  explicit PatchDiscriminator(const DiscriminatorSpec& spec);

  struct Cache {
    std::vector<typename nn::Conv2d<T>::Cache> conv;
    std::vector<typename nn::InstanceNorm<T>::Cache> in;
    std::vector<typename nn::LeakyReLU<T>::Cache> act;
    typename nn::Sigmoid<T>::Cache out_act;
  };

  /// x: [B,1,64,64] -> patch probabilities [B,1,4,4] in (0,1).
  nn::Tensor<T> forward(nn::Tensor<T> x, Cache& c) const;
  nn::Tensor<T> backward(const nn::Tensor<T>& gy, const Cache& c, bool need_gx);

  void collect(const std::string& prefix, std::vector<nn::ParamRef<T>>& out);
  void init(Rng& rng);
  const DiscriminatorSpec& spec() const { return spec_; }

 private:
  DiscriminatorSpec spec_;
  std::vector<nn::Conv2d<T>> conv_;
  std::vector<nn::InstanceNorm<T>> in_;
  nn::LeakyReLU<T> act_;
  nn::Sigmoid<T> out_;
};

extern template class Generator<float>;
extern template class Generator<double>;
extern template class PatchDiscriminator<float>;
extern template class PatchDiscriminator<double>;

}  // namespace detail

/// The full cross-domain model: G_S maps appearance to past gradient,
/// G_A the reverse; D_S and D_A judge the two domains.
struct GardinModel {
  GeneratorSpec gen_spec;
  DiscriminatorSpec disc_spec;
  detail::Generator<float> g_s, g_a;
  detail::PatchDiscriminator<float> d_s, d_a;
  int64_t step = 0;

  GardinModel(const GeneratorSpec& gs = {}, const DiscriminatorSpec& ds = {})
      : gen_spec(gs), disc_spec(ds), g_s(gs), g_a(gs), d_s(ds), d_a(ds) {}

  void init_weights(uint64_t seed);
  std::vector<nn::ParamRef<float>> generator_params();
  std::vector<nn::ParamRef<float>> discriminator_params();
};

/// G_S: appearance -> generated past gradient. Deterministic.
GrayImage generate_gradient(const GardinModel& model, const GrayImage& a);
/// G_A: past gradient -> generated appearance. Deterministic.
GrayImage generate_appearance(const GardinModel& model, const GrayImage& s);

struct GeneratedPair {
  GrayImage s_hat;  // G_S(appearance)
  GrayImage a_hat;  // G_A(past_gradient)
};

/// Batched inference over region pairs. Samples stay independent (instance
/// normalization is per-sample); values agree with the per-image entry
/// points up to float rounding, and identical calls are bit-identical.
std::vector<GeneratedPair> generate_for_pairs(const GardinModel& model,
                                              const std::vector<RegionPair>& pairs,
                                              int batch = 64);

/// Which of the four reconstruction losses participate in training.
struct LossTerms {
  bool as = true, sa = true, a = true, s = true;
  bool any() const { return as || sa || a || s; }
  std::string to_string() const;
  static LossTerms parse(const std::string& str);
};

struct ReconLosses {
  double as = 0.0, sa = 0.0, a = 0.0, s = 0.0;
};

/// The four reconstruction losses evaluated from already generated images.
/// Disabled terms are reported as 0.
ReconLosses reconstruction_losses_from(const GrayImage& s_hat, const GrayImage& a_hat,
                                       const GrayImage& a_cyc, const GrayImage& s_cyc,
                                       const GrayImage& a, const GrayImage& s,
                                       DistanceParts parts, LossTerms enabled);

/// Runs the generators of `model` on one pair and evaluates the four losses.
ReconLosses reconstruction_losses(const GardinModel& model, const GrayImage& a, const GrayImage& s,
                                  DistanceParts parts, LossTerms enabled);

/// Gradient-appearance consistency loss: sum of the enabled terms.
double gac_loss(const ReconLosses& losses, LossTerms enabled);

struct AdvTerms {
  double d_s_term = 0.0;  // E[log D_S(s)] + E[log(1 - D_S(G_S(a)))]
  double d_a_term = 0.0;
};

/// Log-likelihood terms from patch probability maps; probabilities are
/// clamped to [1e-7, 1-1e-7] before the log and averaged over batch and
/// patches.
AdvTerms adversarial_terms(const std::vector<double>& p_real_s, const std::vector<double>& p_fake_s,
                           const std::vector<double>& p_real_a, const std::vector<double>& p_fake_a);

/// Evaluates the adversarial terms for one pair with the current model.
AdvTerms adversarial_losses(const GardinModel& model, const GrayImage& a, const GrayImage& s);

struct GardinTrainConfig {
  int epochs = 200;
  int batch = 64;
  double lr0 = 1e-2;
  int decay_every = 25;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double label_smooth = 0.9;
  DistanceParts parts = DistanceParts::defaults();
  LossTerms enabled;
  int probe_size = 64;
};

/// Stepwise polynomial(2) decay: lr(e) = lr0 * (1 - floor(e/every)*every/E)^2.
double lr_at_epoch(double lr0, int epoch, int total_epochs, int decay_every);

struct GardinEpochLog {
  int epoch = 0;
  double lr = 0.0;
  double loss_as = 0.0, loss_sa = 0.0, loss_a = 0.0, loss_s = 0.0, gac = 0.0;
  double loss_d_s = 0.0, loss_d_a = 0.0, adv_g = 0.0;
  double probe_gac = 0.0;
};

struct GardinTrainResult {
  std::unique_ptr<GardinModel> model;
  std::vector<GardinEpochLog> log;
  double probe_gac_epoch0 = 0.0;
};

/// Alternating adversarial training (one discriminator step, then one
/// generator step per mini-batch). Aborts with NumericsError naming the
/// offending term if any loss goes non-finite. Deterministic given seed.
GardinTrainResult train_gardin(const RegionPairStream& pairs, const GardinTrainConfig& cfg,
                               uint64_t seed);

}  // namespace gardin
