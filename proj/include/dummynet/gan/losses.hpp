// Copyright 2026 The DummyNet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <vector>

#include "dummynet/appearance/vae.hpp"
#include "dummynet/core/rng.hpp"
#include "dummynet/core/tensor.hpp"
#include "dummynet/gan/discriminator.hpp"

namespace dummynet::gan {

struct LossWeights {
  double lambda1 = 1.0;   // WGAN-GP
  double lambda2 = 10.0;  // critic feature reconstruction
  double lambda3 = 10.0;  // perceptual reconstruction
  double lambda4 = 1.0;   // appearance consistency
  double gp_weight = 10.0;
  /// ConfigError unless all weights are >= 0 and lambda1 > 0.
  void validate() const;
};

/// Mean over samples of each sample's mean patch score.
double critic_mean(const Tensor& scores);

/// x_hat = eps * real + (1 - eps) * fake, eps ~ U(0, 1) per sample.
Tensor interpolate(const Tensor& real, const Tensor& fake, Rng& rng);

struct PenaltyResult {
  double penalty = 0.0;
  std::vector<double> grad_norms;  // ||d critic / d x|| per sample
};

/// gp_weight * mean_i (||grad_x critic(x_hat_i)|| - 1)^2. With `accumulate`,
/// adds d penalty / d params to the critic's parameter gradients using a
/// central finite difference of the critic's input gradient along each
/// sample's unit gradient direction (step `fd_step`).
PenaltyResult gradient_penalty(Critic& critic, const Tensor& x_hat, const Tensor& cond, double gp_weight,
                               bool accumulate, double fd_step = 1e-3);

struct WganTerms {
  double critic_loss = 0.0;     // mean D(fake) - mean D(real) + penalty
  double generator_loss = 0.0;  // -mean D(fake)
  double penalty = 0.0;
};

/// Loss values only; no gradients are accumulated. Throws NonFiniteGradient
/// if the critic's input gradient is not finite.
WganTerms wgan_gp_loss(Critic& critic, const Tensor& real, const Tensor& fake, const Tensor& cond,
                       double gp_weight, Rng& rng);

/// Feature maps for the reconstruction losses.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::vector<Tensor> features(const Tensor& x, nn::Tape* tape) const = 0;
  /// Gradient w.r.t. x given one gradient per feature level.
  virtual Tensor backward(const std::vector<Tensor>& dfeatures, nn::Tape& tape) = 0;
};

class IdentityFeatures : public FeatureExtractor {
 public:
  std::vector<Tensor> features(const Tensor& x, nn::Tape* tape) const override;
  Tensor backward(const std::vector<Tensor>& dfeatures, nn::Tape& tape) override;
};

/// The critic's block outputs for a fixed conditioning tensor.
class CriticFeatures : public FeatureExtractor {
 public:
  CriticFeatures(Discriminator& critic, const Tensor& cond) : critic_(critic), cond_(cond) {}
  std::vector<Tensor> features(const Tensor& x, nn::Tape* tape) const override;
  Tensor backward(const std::vector<Tensor>& dfeatures, nn::Tape& tape) override;

 private:
  Discriminator& critic_;
  const Tensor& cond_;
  mutable Shape score_shape_;
};

/// Frozen random-weight pyramid 3 -> 8 -> 16 -> 16 (3x3 stride-2 conv + ReLU,
/// every level tapped), standing in for a pretrained perceptual network.
class PerceptualPyramid : public FeatureExtractor {
 public:
  explicit PerceptualPyramid(std::uint64_t seed = 1234);
  std::vector<Tensor> features(const Tensor& x, nn::Tape* tape) const override;
  Tensor backward(const std::vector<Tensor>& dfeatures, nn::Tape& tape) override;

 private:
  std::unique_ptr<nn::Sequential> net_;
  mutable Shape out_shape_;
};

/// Sum over levels of mean(m_l * |F_l(M * real) - F_l(M * gen)|), where m_l
/// is the mask area-averaged to level l. Optionally the gradient w.r.t. gen.
double masked_feature_loss(FeatureExtractor& fe, const Tensor& mask, const Tensor& real, const Tensor& gen,
                           Tensor* d_gen = nullptr);

/// Batch mean of || mu(M * in) - mu(M * gen) ||_1 through the frozen encoder.
/// Images are resized to 64 x 64 first when needed.
double appearance_loss(appearance::Vae& encoder, const Tensor& mask, const Tensor& in, const Tensor& gen,
                       Tensor* d_gen = nullptr);

struct LossComponents {
  double wgan_gp = 0.0;
  double rec_dis = 0.0;
  double rec_vgg = 0.0;
  double app = 0.0;
};

/// lambda-weighted sum; NonFiniteLoss if any component is not finite.
double total_loss(const LossWeights& weights, const LossComponents& c);

/// Per-step CSV: step,critic_loss,gen_loss,gp,rec_dis,rec_vgg,app,total
class LossLog {
 public:
  explicit LossLog(const std::filesystem::path& path);
  void append(long step, double critic_loss, double gen_loss, double gp, const LossComponents& c, double total);

 private:
  std::ofstream out_;
};

}  // namespace dummynet::gan
