#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gardin/nn.hpp"
#include "gardin/pmsre.hpp"

namespace gardin {

struct FocalLossParams {
  double alpha = 0.1;
  double gamma = 10.0;
};

/// FL(p) = -alpha * (1 - p)^gamma * log(p), with p clamped to
/// [1e-7, 1-1e-7]. gamma = 0, alpha = 1 reduces to cross-entropy.
double focal_loss(double p, const FocalLossParams& params);

/// Fully connected generator (noise -> fake e) and discriminator
/// (e -> probability of being a real/normal reconstruction-error vector).
struct AlrecSpec {
  std::vector<int> gen_hidden{64, 128, 128, 256, 256};
  std::vector<int> disc_hidden{256, 256, 128, 128, 64};
  int noise_dim = 16;
  int e_dim = 8;
  double dropout = 0.3;
  double lrelu_slope = 0.2;
};

namespace detail {

/// Dense stack with leaky ReLU + dropout between hidden layers; linear or
/// sigmoid output head.
template <typename T>
class Mlp {
 public:
  Mlp(std::vector<int> widths, bool sigmoid_out, double dropout, double slope);

  struct Cache {
    std::vector<typename nn::Dense<T>::Cache> dense;
    std::vector<typename nn::LeakyReLU<T>::Cache> act;
    std::vector<typename nn::Dropout<T>::Cache> drop;
    typename nn::Sigmoid<T>::Cache out_act;
  };

  /// rng is required only when train is true and dropout > 0.
  nn::Tensor<T> forward(nn::Tensor<T> x, Cache& c, bool train, Rng* rng) const;
  nn::Tensor<T> backward(const nn::Tensor<T>& gy, const Cache& c, bool need_gx);

  void collect(const std::string& prefix, std::vector<nn::ParamRef<T>>& out);
  void init(Rng& rng);
  const std::vector<int>& widths() const { return widths_; }

 private:
  std::vector<int> widths_;
  bool sigmoid_out_;
  std::vector<nn::Dense<T>> dense_;
  nn::LeakyReLU<T> act_;
  nn::Dropout<T> drop_;
  nn::Sigmoid<T> out_;
};

extern template class Mlp<float>;
extern template class Mlp<double>;

}  // namespace detail

struct ClassifierModel {
  AlrecSpec spec;
  detail::Mlp<float> gen;
  detail::Mlp<float> disc;
  int64_t step = 0;

  explicit ClassifierModel(const AlrecSpec& s = {});
  void init_weights(uint64_t seed);
  std::vector<nn::ParamRef<float>> generator_params();
  std::vector<nn::ParamRef<float>> discriminator_params();
};

struct AlrecTrainConfig {
  int epochs = 50;
  int batch = 256;
  double lr0 = 1e-4;
  int decay_every = 10;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double label_smooth = 0.9;
};

struct AlrecEpochLog {
  int epoch = 0;
  double lr = 0.0;
  double loss_d = 0.0;
  double loss_g = 0.0;
  double mean_d_real = 0.0;
  double mean_d_fake = 0.0;
};

struct AlrecTrainResult {
  std::unique_ptr<ClassifierModel> model;
  std::vector<AlrecEpochLog> log;
};

/// Adversarial training on PMSRE vectors of normal regions: D minimizes
/// FL on real e (smoothed label) and on 1 - D(G(z)); G minimizes the
/// non-saturating FL(D(G(z))). z is 16-dim standard normal noise.
AlrecTrainResult train_alrec(const std::vector<PmsreVector>& real_e, const AlrecTrainConfig& cfg,
                             const FocalLossParams& params, uint64_t seed);

/// Region abnormality score s_e = 1 - D(e); dropout disabled.
double score_region(const ClassifierModel& model, const PmsreVector& e);

}  // namespace gardin
