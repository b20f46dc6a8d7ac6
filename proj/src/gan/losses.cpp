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

#include "dummynet/gan/losses.hpp"

#include <cmath>

#include "dummynet/core/error.hpp"
#include "dummynet/nn/functional.hpp"

namespace dummynet::gan {

void LossWeights::validate() const {
  if (!(lambda1 > 0.0) || !(lambda2 >= 0.0) || !(lambda3 >= 0.0) || !(lambda4 >= 0.0) || !(gp_weight >= 0.0))
    throw Error(ErrorCode::ConfigError, "loss weights must be >= 0 with lambda1 > 0");
}

double critic_mean(const Tensor& scores) { return mean(scores); }

Tensor interpolate(const Tensor& real, const Tensor& fake, Rng& rng) {
  if (real.shape() != fake.shape()) throw Error(ErrorCode::ShapeMismatch, "interpolate shapes differ");
  Tensor x(real.shape());
  const std::size_t per = real.shape().sample_size();
  for (int n = 0; n < real.n(); ++n) {
    const double e = rng.uniform();
    for (std::size_t i = n * per; i < (n + 1) * per; ++i) x[i] = e * real[i] + (1.0 - e) * fake[i];
  }
  return x;
}

namespace {

// Per-sample weights w_n spread evenly over that sample's patch map.
Tensor per_sample_grad(const Shape& scores, const std::vector<double>& w) {
  Tensor d(scores);
  const std::size_t per = scores.sample_size();
  for (int n = 0; n < scores.n; ++n)
    for (std::size_t i = n * per; i < (n + 1) * per; ++i) d[i] = w[n] / static_cast<double>(per);
  return d;
}

}  // namespace

PenaltyResult gradient_penalty(Critic& critic, const Tensor& x_hat, const Tensor& cond, double gp_weight,
                               bool accumulate, double fd_step) {
  const int batch = x_hat.n();
  PenaltyResult r;
  nn::Tape tape(false);
  const Tensor s = critic.forward(x_hat, cond, &tape);
  const Tensor g = critic.backward(per_sample_grad(s.shape(), std::vector<double>(batch, 1.0)), tape);
  if (!all_finite(g)) throw Error(ErrorCode::NonFiniteGradient, "critic input gradient is not finite");
  const std::size_t per = g.shape().sample_size();
  r.grad_norms.resize(batch);
  for (int n = 0; n < batch; ++n) {
    double ss = 0.0;
    for (std::size_t i = n * per; i < (n + 1) * per; ++i) ss += g[i] * g[i];
    r.grad_norms[n] = std::sqrt(ss);
    r.penalty += (r.grad_norms[n] - 1.0) * (r.grad_norms[n] - 1.0);
  }
  r.penalty *= gp_weight / batch;
  if (!accumulate || gp_weight == 0.0) return r;

  // d/dtheta (||g|| - 1)^2 = 2 (||g|| - 1) u . d/dtheta g with u = g / ||g||,
  // and u . g(x) is the directional derivative of the critic along u, so its
  // parameter gradient is the central difference of critic gradients at x +- h u.
  Tensor dir(x_hat.shape());
  std::vector<double> coef(batch, 0.0);
  for (int n = 0; n < batch; ++n) {
    if (r.grad_norms[n] == 0.0) continue;  // direction undefined; subgradient 0
    coef[n] = gp_weight * 2.0 * (r.grad_norms[n] - 1.0) / batch / (2.0 * fd_step);
    for (std::size_t i = n * per; i < (n + 1) * per; ++i) dir[i] = g[i] / r.grad_norms[n];
  }
  for (double sign : {1.0, -1.0}) {
    Tensor x = x_hat;
    add_inplace(x, dir, sign * fd_step);
    nn::Tape t;
    const Tensor sp = critic.forward(x, cond, &t);
    std::vector<double> w(coef);
    for (double& v : w) v *= sign;
    critic.backward(per_sample_grad(sp.shape(), w), t);
  }
  return r;
}

WganTerms wgan_gp_loss(Critic& critic, const Tensor& real, const Tensor& fake, const Tensor& cond,
                       double gp_weight, Rng& rng) {
  if (real.shape() != fake.shape()) throw Error(ErrorCode::ShapeMismatch, "real and fake shapes differ");
  WganTerms t;
  const double d_real = critic_mean(critic.forward(real, cond, nullptr));
  const double d_fake = critic_mean(critic.forward(fake, cond, nullptr));
  t.penalty = gradient_penalty(critic, interpolate(real, fake, rng), cond, gp_weight, false).penalty;
  t.critic_loss = d_fake - d_real + t.penalty;
  t.generator_loss = -d_fake;
  return t;
}

// ------------------------------------------------------ feature extractors

std::vector<Tensor> IdentityFeatures::features(const Tensor& x, nn::Tape*) const { return {x}; }

Tensor IdentityFeatures::backward(const std::vector<Tensor>& d, nn::Tape&) { return d.at(0); }

std::vector<Tensor> CriticFeatures::features(const Tensor& x, nn::Tape* tape) const {
  CriticOutput out = critic_.criticize(x, cond_, tape);
  score_shape_ = out.patch_scores.shape();
  return std::move(out.features);
}

Tensor CriticFeatures::backward(const std::vector<Tensor>& d, nn::Tape& tape) {
  return critic_.backward_taps(Tensor(score_shape_), d, tape);
}

PerceptualPyramid::PerceptualPyramid(std::uint64_t seed) : net_(std::make_unique<nn::Sequential>()) {
  Rng rng(seed);
  const int chans[4] = {3, 8, 16, 16};
  for (int i = 0; i < 3; ++i) {
    net_->add<nn::Conv2d>(chans[i], chans[i + 1], 3, 2, 1, rng);
    net_->add<nn::LeakyRelu>(0.0);
    net_->tap();
  }
}

std::vector<Tensor> PerceptualPyramid::features(const Tensor& x, nn::Tape* tape) const {
  std::vector<Tensor> taps;
  out_shape_ = net_->forward_taps(x, tape, taps).shape();
  return taps;
}

Tensor PerceptualPyramid::backward(const std::vector<Tensor>& d, nn::Tape& tape) {
  return net_->backward_taps(Tensor(out_shape_), d, tape);
}

// ------------------------------------------------------------------ losses

double masked_feature_loss(FeatureExtractor& fe, const Tensor& mask, const Tensor& real, const Tensor& gen,
                           Tensor* d_gen) {
  if (real.shape() != gen.shape()) throw Error(ErrorCode::ShapeMismatch, "real and generated shapes differ");
  const Tensor xr = nn::mul_channels(real, mask);
  const Tensor xg = nn::mul_channels(gen, mask);
  const std::vector<Tensor> fr = fe.features(xr, nullptr);
  nn::Tape tape(false);
  const std::vector<Tensor> fg = fe.features(xg, d_gen ? &tape : nullptr);
  double loss = 0.0;
  std::vector<Tensor> grads;
  for (std::size_t l = 0; l < fr.size(); ++l) {
    const Tensor m = nn::area_downsample(mask, fr[l].h(), fr[l].w());
    const double inv = 1.0 / static_cast<double>(fr[l].size());
    const std::size_t plane = fr[l].shape().plane_size();
    Tensor g(fr[l].shape());
    for (int n = 0; n < fr[l].n(); ++n)
      for (int c = 0; c < fr[l].c(); ++c) {
        const double* mp = m.plane(n, 0);
        const double* a = fr[l].plane(n, c);
        const double* b = fg[l].plane(n, c);
        double* gp = g.plane(n, c);
        for (std::size_t i = 0; i < plane; ++i) {
          const double diff = b[i] - a[i];
          loss += mp[i] * std::abs(diff) * inv;
          gp[i] = diff > 0 ? mp[i] * inv : (diff < 0 ? -mp[i] * inv : 0.0);
        }
      }
    grads.push_back(std::move(g));
  }
  if (d_gen) *d_gen = nn::mul_channels(fe.backward(grads, tape), mask);
  return loss;
}

double appearance_loss(appearance::Vae& encoder, const Tensor& mask, const Tensor& in, const Tensor& gen,
                       Tensor* d_gen) {
  if (in.shape() != gen.shape()) throw Error(ErrorCode::ShapeMismatch, "appearance inputs differ in shape");
  const int s = appearance::kImageSize;
  const bool resize = in.h() != s || in.w() != s;
  const Tensor xi = nn::mul_channels(in, mask);
  const Tensor xg = nn::mul_channels(gen, mask);
  const Tensor ri = resize ? nn::resize_bilinear(xi, s, s) : xi;
  const Tensor rg = resize ? nn::resize_bilinear(xg, s, s) : xg;
  const Tensor mu_in = encoder.encode(ri, nullptr).first;
  nn::Tape tape(false);
  const Tensor mu_gen = encoder.encode(rg, d_gen ? &tape : nullptr).first;
  const double inv = 1.0 / in.n();
  double loss = 0.0;
  Tensor dmu(mu_gen.shape());
  for (std::size_t i = 0; i < mu_gen.size(); ++i) {
    const double diff = mu_gen[i] - mu_in[i];
    loss += std::abs(diff) * inv;
    dmu[i] = diff > 0 ? inv : (diff < 0 ? -inv : 0.0);
  }
  if (d_gen) {
    Tensor d = encoder.encode_backward(dmu, Tensor(), tape);
    if (resize) d = nn::resize_bilinear_backward(d, xg.shape());
    *d_gen = nn::mul_channels(d, mask);
  }
  return loss;
}

double total_loss(const LossWeights& w, const LossComponents& c) {
  for (double v : {c.wgan_gp, c.rec_dis, c.rec_vgg, c.app})
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteLoss, "loss component is not finite");
  return w.lambda1 * c.wgan_gp + w.lambda2 * c.rec_dis + w.lambda3 * c.rec_vgg + w.lambda4 * c.app;
}

LossLog::LossLog(const std::filesystem::path& path) : out_(path) {
  if (!out_) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out_ << "step,critic_loss,gen_loss,gp,rec_dis,rec_vgg,app,total\n";
}

void LossLog::append(long step, double critic_loss, double gen_loss, double gp, const LossComponents& c,
                     double total) {
  out_ << step << ',' << critic_loss << ',' << gen_loss << ',' << gp << ',' << c.rec_dis << ',' << c.rec_vgg << ','
       << c.app << ',' << total << '\n';
  out_.flush();
}

}  // namespace dummynet::gan
