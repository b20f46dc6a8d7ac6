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

#include "dummynet/gan/generator.hpp"

#include <cmath>

#include "dummynet/core/archive.hpp"
#include "dummynet/core/error.hpp"
#include "dummynet/nn/functional.hpp"
#include "dummynet/pose/skeleton.hpp"

namespace dummynet::gan {

Conditioning build_conditioning(const Tensor& background, const Tensor& mask, const Tensor& heatmaps,
                                int n_blocks) {
  const int s = 16 << n_blocks;
  if (background.c() != 3 || mask.c() != 1 || heatmaps.c() != pose::kNumKeypoints)
    throw Error(ErrorCode::ShapeMismatch, "conditioning expects 3 + 1 + 17 channels");
  for (const Tensor* t : {&background, &mask, &heatmaps})
    if (t->n() != background.n() || t->h() != s || t->w() != s)
      throw Error(ErrorCode::ShapeMismatch, "conditioning input " + t->shape().str() + " is not " +
                                                std::to_string(s) + " x " + std::to_string(s));
  Tensor masked = background;
  const std::size_t plane = background.shape().plane_size();
  for (int n = 0; n < background.n(); ++n) {
    const double* m = mask.plane(n, 0);
    for (int c = 0; c < 3; ++c) {
      double* p = masked.plane(n, c);
      for (std::size_t i = 0; i < plane; ++i) p[i] *= 1.0 - m[i];
    }
  }
  const Tensor parts[2] = {masked, heatmaps};
  const Tensor full = concat_channels(parts);
  Conditioning cond;
  for (int k = 0; k <= n_blocks; ++k) {
    const int r = 16 << k;
    cond.levels.push_back(k == n_blocks ? full : nn::area_downsample(full, r, r));
  }
  return cond;
}

// ------------------------------------------------------------------ SPADE

SpadeNorm::SpadeNorm(int channels, int hidden, Rng& rng)
    : norm_(channels, false),
      shared_(kCondChannels, hidden, 3, 1, 1, rng),
      gamma_(hidden, channels, 3, 1, 1, rng, true, 0.1),
      beta_(hidden, channels, 3, 1, 1, rng, true, 0.1) {}

Tensor SpadeNorm::forward(const Tensor& x, const Tensor& cond, nn::Tape* tape) const {
  if (cond.h() != x.h() || cond.w() != x.w() || cond.n() != x.n())
    throw Error(ErrorCode::ShapeMismatch, "SPADE conditioning " + cond.shape().str() + " vs " + x.shape().str());
  Tensor n = norm_.forward(x, tape);
  const Tensor a = relu_.forward(shared_.forward(cond, tape), tape);
  Tensor g = gamma_.forward(a, tape);
  const Tensor b = beta_.forward(a, tape);
  Tensor y(x.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = n[i] * (1.0 + g[i]) + b[i];
  if (tape) {
    tape->push(std::move(n));
    tape->push(std::move(g));
  }
  return y;
}

Tensor SpadeNorm::backward(const Tensor& dy, nn::Tape& tape) {
  const Tensor g = tape.pop();
  const Tensor n = tape.pop();
  Tensor dn(dy.shape()), dg(dy.shape());
  for (std::size_t i = 0; i < dy.size(); ++i) {
    dn[i] = dy[i] * (1.0 + g[i]);
    dg[i] = dy[i] * n[i];
  }
  Tensor da = beta_.backward(dy, tape);
  add_inplace(da, gamma_.backward(dg, tape));
  shared_.backward(relu_.backward(da, tape), tape);
  return norm_.backward(dn, tape);
}

void SpadeNorm::register_parameters(nn::ParameterSet& set, const std::string& prefix) {
  shared_.register_parameters(set, prefix + "shared.");
  gamma_.register_parameters(set, prefix + "gamma.");
  beta_.register_parameters(set, prefix + "beta.");
}

SpadeResBlock::SpadeResBlock(int channels, int hidden, Rng& rng)
    : norm1_(channels, hidden, rng),
      norm2_(channels, hidden, rng),
      conv1_(channels, channels, 3, 1, 1, rng),
      conv2_(channels, channels, 3, 1, 1, rng, true, 0.5) {}

Tensor SpadeResBlock::forward(const Tensor& x, const Tensor& cond, nn::Tape* tape) const {
  Tensor h = conv1_.forward(act_.forward(norm1_.forward(x, cond, tape), tape), tape);
  h = conv2_.forward(act_.forward(norm2_.forward(h, cond, tape), tape), tape);
  add_inplace(h, x);
  return h;
}

Tensor SpadeResBlock::backward(const Tensor& dy, nn::Tape& tape) {
  Tensor d = norm2_.backward(act_.backward(conv2_.backward(dy, tape), tape), tape);
  d = norm1_.backward(act_.backward(conv1_.backward(d, tape), tape), tape);
  add_inplace(d, dy);
  return d;
}

void SpadeResBlock::register_parameters(nn::ParameterSet& set, const std::string& prefix) {
  norm1_.register_parameters(set, prefix + "norm1.");
  norm2_.register_parameters(set, prefix + "norm2.");
  conv1_.register_parameters(set, prefix + "conv1.");
  conv2_.register_parameters(set, prefix + "conv2.");
}

// -------------------------------------------------------------- generator

Generator::Generator(GeneratorConfig config, std::uint64_t seed) : config_(config) {
  if (config.n_blocks < 1 || config.n_blocks > 6 || config.base_width < 1 || config.hidden < 1)
    throw Error(ErrorCode::ConfigError, "invalid generator configuration");
  Rng rng(seed);
  const int w = config.base_width;
  fc_ = std::make_unique<nn::Linear>(kLatentDim, w * 16, rng);
  fc_->register_parameters(params_, "fc.");
  for (int k = 0; k < config.n_blocks; ++k) {
    blocks_.push_back(std::make_unique<SpadeResBlock>(w, config.hidden, rng));
    blocks_.back()->register_parameters(params_, "block" + std::to_string(k) + ".");
  }
  for (int k = 0; k <= config.n_blocks; ++k) {
    to_rgb_.push_back(std::make_unique<nn::Conv2d>(w, 3, 3, 1, 1, rng, true, 1.0));
    to_rgb_.back()->register_parameters(params_, "rgb" + std::to_string(k) + ".");
  }
}

void Generator::check_inputs(const Tensor& z, const Conditioning& cond, int stage) const {
  if (stage < 0 || stage > config_.n_blocks) throw Error(ErrorCode::ShapeMismatch, "stage out of range");
  if (z.shape().sample_size() != static_cast<std::size_t>(kLatentDim))
    throw Error(ErrorCode::ShapeMismatch, "latent must have 16 values per sample");
  if (static_cast<int>(cond.levels.size()) != config_.n_blocks + 1)
    throw Error(ErrorCode::ShapeMismatch, "conditioning has " + std::to_string(cond.levels.size()) +
                                              " levels, schedule needs " + std::to_string(config_.n_blocks + 1));
  for (int k = 0; k <= config_.n_blocks; ++k) {
    const Tensor& c = cond.levels[k];
    if (c.n() != z.n() || c.c() != kCondChannels || c.h() != config_.stage_size(k) || c.w() != config_.stage_size(k))
      throw Error(ErrorCode::ShapeMismatch, "conditioning level " + std::to_string(k) + " has shape " +
                                                c.shape().str());
  }
}

Tensor Generator::forward(const Tensor& z, const Conditioning& cond, int stage, double alpha, nn::Tape* tape) const {
  check_inputs(z, cond, stage);
  const int w = config_.base_width;
  Tensor h = nn::upsample_bilinear(fc_->forward(z, tape).reshaped(Shape{z.n(), w, 4, 4}), 4);
  Tensor prev_features;
  for (int k = 0; k < stage; ++k) {
    if (k == stage - 1) prev_features = h;
    h = nn::upsample_bilinear(blocks_[k]->forward(h, cond.levels[k], tape), 2);
  }
  Tensor out = sigmoid_.forward(to_rgb_[stage]->forward(h, tape), tape);
  if (stage > 0 && alpha < 1.0) {
    const Tensor prev = nn::upsample_bilinear(sigmoid_.forward(to_rgb_[stage - 1]->forward(prev_features, tape), tape), 2);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha * out[i] + (1.0 - alpha) * prev[i];
  }
  return out;
}

void Generator::backward(const Tensor& dy, int stage, double alpha, nn::Tape& tape) {
  const int w = config_.base_width;
  const int n = dy.n();
  Tensor extra;
  Tensor d = dy;
  if (stage > 0 && alpha < 1.0) {
    const int r = config_.stage_size(stage - 1);
    Tensor dprev = dy;
    scale_inplace(dprev, 1.0 - alpha);
    dprev = nn::upsample_bilinear_backward(dprev, Shape{n, 3, r, r});
    extra = to_rgb_[stage - 1]->backward(sigmoid_.backward(dprev, tape), tape);
    scale_inplace(d, alpha);
  }
  d = to_rgb_[stage]->backward(sigmoid_.backward(d, tape), tape);
  for (int k = stage - 1; k >= 0; --k) {
    const int r = config_.stage_size(k);
    d = nn::upsample_bilinear_backward(d, Shape{n, w, r, r});
    d = blocks_[k]->backward(d, tape);
    if (k == stage - 1 && !extra.empty()) add_inplace(d, extra);
  }
  d = nn::upsample_bilinear_backward(d, Shape{n, w, 4, 4});
  fc_->backward(d.reshaped(Shape{n, w * 16, 1, 1}), tape);
}

Tensor Generator::generate(const Tensor& z, const Conditioning& cond) const {
  return forward(z, cond, config_.n_blocks, 1.0, nullptr);
}

void Generator::save(const std::filesystem::path& path) const {
  Archive ar(kGeneratorTag);
  ar.meta()["n_blocks"] = config_.n_blocks;
  ar.meta()["base_width"] = config_.base_width;
  ar.meta()["hidden"] = config_.hidden;
  params_.save_to(ar);
  ar.save(path);
}

Generator Generator::load(const std::filesystem::path& path) {
  const Archive ar = Archive::load(path, kGeneratorTag);
  GeneratorConfig c;
  c.n_blocks = ar.meta().at("n_blocks").get<int>();
  c.base_width = ar.meta().at("base_width").get<int>();
  c.hidden = ar.meta().at("hidden").get<int>();
  Generator g(c, 0);
  g.params_.load_from(ar);
  return g;
}

std::size_t generator_parameter_count(const GeneratorConfig& c) {
  const std::size_t w = c.base_width, h = c.hidden;
  const std::size_t fc = kLatentDim * 16 * w + 16 * w;
  const std::size_t spade = (kCondChannels * h * 9 + h) + 2 * (h * w * 9 + w);
  const std::size_t block = 2 * spade + 2 * (w * w * 9 + w);
  const std::size_t rgb = w * 3 * 9 + 3;
  return fc + c.n_blocks * block + (c.n_blocks + 1) * rgb;
}

}  // namespace dummynet::gan
