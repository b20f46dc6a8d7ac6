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

#include "dummynet/gan/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <memory>
#include <numeric>

#include "dummynet/compose/compositor.hpp"
#include "dummynet/core/error.hpp"
#include "dummynet/nn/functional.hpp"
#include "dummynet/nn/optim.hpp"

namespace dummynet::gan {
namespace {

Tensor gather(const std::vector<GanSample>& data, const std::vector<std::size_t>& idx, Tensor GanSample::*field) {
  std::vector<Tensor> parts;
  parts.reserve(idx.size());
  for (std::size_t i : idx) parts.push_back(data[i].*field);
  return concat_batch(parts);
}

// d(mean of per-sample patch means) / d scores, times `sign`.
Tensor mean_score_grad(const Shape& s, double sign) {
  return Tensor(s, sign / static_cast<double>(s.n * s.sample_size()));
}

}  // namespace

long total_steps(const GanTrainConfig& c, int n_blocks) {
  return static_cast<long>(c.stage_steps) * n_blocks + c.final_steps;
}

StageAlpha stage_schedule(const GanTrainConfig& c, int n_blocks, long step) {
  StageAlpha sa;
  sa.stage = std::min<long>(n_blocks, c.stage_steps > 0 ? step / c.stage_steps : n_blocks);
  const long into = step - static_cast<long>(sa.stage) * c.stage_steps;
  if (sa.stage > 0 && c.fade_steps > 0 && into < c.fade_steps)
    sa.alpha = static_cast<double>(into + 1) / (c.fade_steps + 1);
  return sa;
}

Synthesis synthesize(const Generator& g, const Tensor& z, const Tensor& background, const Tensor& mask,
                     const Tensor& heatmaps) {
  const Conditioning cond = build_conditioning(background, mask, heatmaps, g.config().n_blocks);
  Synthesis s;
  s.person = g.generate(z, cond);
  s.composite = compose::composite(mask, s.person, background);
  return s;
}

GanTrainResult train_gan(Generator& g, Discriminator& d, appearance::Vae& encoder, const std::vector<GanSample>& data,
                         const GanTrainConfig& cfg) {
  if (data.empty()) throw Error(ErrorCode::EmptyDataset, "no GAN training samples");
  cfg.weights.validate();
  const int n = g.config().n_blocks;
  const int s = g.config().output_size();
  for (const GanSample& x : data)
    if (x.image.shape() != Shape{1, 3, s, s} || x.mask.shape() != Shape{1, 1, s, s} ||
        x.heatmaps.shape() != Shape{1, 17, s, s})
      throw Error(ErrorCode::ShapeMismatch, "GAN sample does not match output size " + std::to_string(s));

  Rng rng(cfg.seed);
  nn::Adam opt_g(g.parameters(), {cfg.lr_generator, cfg.beta1, cfg.beta2, 1e-8});
  nn::Adam opt_d(d.parameters(), {cfg.lr_critic, cfg.beta1, cfg.beta2, 1e-8});
  PerceptualPyramid perceptual;
  std::unique_ptr<LossLog> log;
  if (!cfg.log_path.empty()) log = std::make_unique<LossLog>(cfg.log_path);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  const int batch = std::min<int>(cfg.batch, static_cast<int>(data.size()));

  GanTrainResult result;
  const long steps = total_steps(cfg, n);
  for (long step = 0; step < steps; ++step) {
    const StageAlpha sa = stage_schedule(cfg, n, step);
    std::vector<std::size_t> idx;
    while (static_cast<int>(idx.size()) < batch) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng.engine());
        cursor = 0;
      }
      idx.push_back(order[cursor++]);
    }
    const Tensor real = gather(data, idx, &GanSample::image);
    const Tensor mask = gather(data, idx, &GanSample::mask);
    const Tensor heat = gather(data, idx, &GanSample::heatmaps);
    const Conditioning cond = build_conditioning(real, mask, heat, n);
    const Tensor& cond_full = cond.levels.back();

    Tensor donor = appearance::mask_background(real, mask);
    if (s != appearance::kImageSize) donor = nn::resize_bilinear(donor, appearance::kImageSize, appearance::kImageSize);
    auto [mu, log_var] = encoder.encode(donor, nullptr);
    const Tensor z = appearance::reparametrize(mu, log_var, rng);

    nn::Tape g_tape;
    const Tensor out = g.forward(z, cond, sa.stage, sa.alpha, &g_tape);
    const Tensor out_full = nn::resize_bilinear(out, s, s);
    const Tensor fake = compose::composite(mask, out_full, real);

    // Critic: mean D(fake) - mean D(real) + GP.
    d.parameters().zero_grad();
    double d_fake, d_real;
    {
      nn::Tape t;
      const Tensor sc = d.forward(fake, cond_full, &t);
      d_fake = critic_mean(sc);
      d.backward(mean_score_grad(sc.shape(), 1.0), t);
    }
    {
      nn::Tape t;
      const Tensor sc = d.forward(real, cond_full, &t);
      d_real = critic_mean(sc);
      d.backward(mean_score_grad(sc.shape(), -1.0), t);
    }
    const PenaltyResult gp =
        gradient_penalty(d, interpolate(real, fake, rng), cond_full, cfg.weights.gp_weight, true);
    opt_d.step();
    const double critic_loss = d_fake - d_real + gp.penalty;

    // Generator: the four weighted losses on the composite, critic frozen.
    LossComponents c;
    Tensor d_fake_img;
    {
      nn::Tape t(false);
      const Tensor sc = d.forward(fake, cond_full, &t);
      c.wgan_gp = -critic_mean(sc);
      d_fake_img = d.backward(mean_score_grad(sc.shape(), -1.0), t);
      scale_inplace(d_fake_img, cfg.weights.lambda1);
    }
    Tensor grad;
    if (cfg.weights.lambda2 > 0) {
      CriticFeatures cf(d, cond_full);
      c.rec_dis = masked_feature_loss(cf, mask, real, fake, &grad);
      add_inplace(d_fake_img, grad, cfg.weights.lambda2);
    }
    if (cfg.weights.lambda3 > 0) {
      c.rec_vgg = masked_feature_loss(perceptual, mask, real, fake, &grad);
      add_inplace(d_fake_img, grad, cfg.weights.lambda3);
    }
    if (cfg.weights.lambda4 > 0) {
      c.app = appearance_loss(encoder, mask, real, fake, &grad);
      add_inplace(d_fake_img, grad, cfg.weights.lambda4);
    }
    const double total = total_loss(cfg.weights, c);
    if (!all_finite(d_fake_img)) throw Error(ErrorCode::NonFiniteGradient, "generator gradient");
    const Tensor d_out = nn::resize_bilinear_backward(nn::mul_channels(d_fake_img, mask), out.shape());
    g.parameters().zero_grad();
    g.backward(d_out, sa.stage, sa.alpha, g_tape);
    opt_g.step();

    if (log) log->append(step, critic_loss, c.wgan_gp, gp.penalty, c, total);
    if (cfg.verbose && (step % 50 == 0 || step + 1 == steps))
      std::cerr << "gan step " << step << " stage " << sa.stage << " alpha " << sa.alpha << " critic "
                << critic_loss << " gp " << gp.penalty << " total " << total << " rec_vgg " << c.rec_vgg << " app "
                << c.app << "\n";
    result.steps = step + 1;
    result.last_critic_loss = critic_loss;
    result.last_generator_loss = total;
    result.last_components = c;
  }
  return result;
}

}  // namespace dummynet::gan
