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

#include "dummynet/appearance/vae.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>

#include "dummynet/core/archive.hpp"
#include "dummynet/core/error.hpp"
#include "dummynet/nn/functional.hpp"
#include "dummynet/nn/optim.hpp"

namespace dummynet::appearance {

Vae::Vae(VaeConfig config, std::uint64_t seed) : config_(config) {
  if (config.width <= 0) throw Error(ErrorCode::ConfigError, "VAE width must be positive");
  Rng rng(seed);
  const int w = config.width;
  trunk_ = std::make_unique<nn::Sequential>();
  const int chans[5] = {3, w, 2 * w, 4 * w, 4 * w};
  for (int i = 0; i < 4; ++i) {
    trunk_->add<nn::Conv2d>(chans[i], chans[i + 1], 4, 2, 1, rng);
    trunk_->add<nn::LeakyRelu>(0.2);
  }
  const int flat = 4 * w * 4 * 4;
  head_mu_ = std::make_unique<nn::Linear>(flat, kLatentDim, rng);
  head_lv_ = std::make_unique<nn::Linear>(flat, kLatentDim, rng, 0.1);

  decoder_ = std::make_unique<nn::Sequential>();
  decoder_->add<nn::Linear>(kLatentDim, flat, rng);
  decoder_->add<nn::Reshape>(4 * w, 4, 4);
  decoder_->add<nn::LeakyRelu>(0.2);
  const int dchans[5] = {4 * w, 4 * w, 2 * w, w, 3};
  for (int i = 0; i < 4; ++i) {
    decoder_->add<nn::ConvTranspose2d>(dchans[i], dchans[i + 1], 4, 2, 1, 0, rng);
    if (i < 3) decoder_->add<nn::LeakyRelu>(0.2);
  }

  trunk_->register_parameters(enc_params_, "enc.trunk.");
  head_mu_->register_parameters(enc_params_, "enc.mu.");
  head_lv_->register_parameters(enc_params_, "enc.logvar.");
  decoder_->register_parameters(dec_params_, "dec.");
  for (const auto& [name, p] : enc_params_.entries()) all_params_.add(name, *p);
  for (const auto& [name, p] : dec_params_.entries()) all_params_.add(name, *p);
}

std::pair<Tensor, Tensor> Vae::encode(const Tensor& x, nn::Tape* tape) const {
  if (x.c() != 3 || x.h() != kImageSize || x.w() != kImageSize)
    throw Error(ErrorCode::BadResolution, "appearance encoder expects (n, 3, 64, 64), got " + x.shape().str());
  const Tensor h = trunk_->forward(x, tape);
  Tensor mu = head_mu_->forward(h, tape);
  Tensor lv = head_lv_->forward(h, tape);
  return {std::move(mu), std::move(lv)};
}

Tensor Vae::encode_backward(const Tensor& dmu, const Tensor& dlv, nn::Tape& tape) {
  // Heads were pushed mu then log_var; unwind in reverse.
  Tensor dh = head_lv_->backward(dlv.empty() ? Tensor(dmu.shape()) : dlv, tape);
  add_inplace(dh, head_mu_->backward(dmu.empty() ? Tensor(dlv.shape()) : dmu, tape));
  return trunk_->backward(dh, tape);
}

Tensor Vae::decode_logits(const Tensor& z, nn::Tape* tape) const {
  if (z.shape().sample_size() != static_cast<std::size_t>(kLatentDim))
    throw Error(ErrorCode::ShapeMismatch, "latent must have 16 values per sample, got " + z.shape().str());
  return decoder_->forward(z, tape);
}

Tensor Vae::decode_backward(const Tensor& dlogits, nn::Tape& tape) { return decoder_->backward(dlogits, tape); }

Tensor Vae::decode(const Tensor& z) const { return nn::sigmoid(decode_logits(z, nullptr)); }

void Vae::save(const std::filesystem::path& path) const {
  Archive ar(kVaeTag);
  ar.meta()["width"] = config_.width;
  all_params_.save_to(ar);
  ar.save(path);
}

Vae Vae::load(const std::filesystem::path& path) {
  const Archive ar = Archive::load(path, kVaeTag);
  Vae v(VaeConfig{ar.meta().at("width").get<int>()}, 0);
  v.all_params_.load_from(ar);
  return v;
}

Tensor reparametrize(const Tensor& mu, const Tensor& log_var, Rng& rng, Tensor* eps_out) {
  if (mu.shape() != log_var.shape()) throw Error(ErrorCode::ShapeMismatch, "mu and log_var shapes differ");
  Tensor eps(mu.shape());
  for (double& e : eps.vec()) e = rng.normal();
  Tensor z(mu.shape());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = mu[i] + std::exp(0.5 * log_var[i]) * eps[i];
  if (eps_out) *eps_out = std::move(eps);
  return z;
}

Tensor reparametrize(const Tensor& mu, const Tensor& log_var, std::uint64_t seed) {
  Rng rng(seed);
  return reparametrize(mu, log_var, rng);
}

AppearanceCode encode(const Vae& vae, const Tensor& masked_image, std::uint64_t seed) {
  AppearanceCode code;
  std::tie(code.mu, code.log_var) = vae.encode(masked_image, nullptr);
  Rng rng(seed);
  code.z = reparametrize(code.mu, code.log_var, rng, &code.eps);
  return code;
}

Tensor mask_background(const Tensor& image, const Tensor& mask) { return nn::mul_channels(image, mask); }

double kl_divergence(const Tensor& mu, const Tensor& lv, Tensor* dmu, Tensor* dlv) {
  if (mu.shape() != lv.shape()) throw Error(ErrorCode::ShapeMismatch, "mu and log_var shapes differ");
  const double inv = 1.0 / std::max(1, mu.n());
  if (dmu) *dmu = Tensor(mu.shape());
  if (dlv) *dlv = Tensor(lv.shape());
  double kl = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double v = std::exp(lv[i]);
    kl += 0.5 * (mu[i] * mu[i] + v - 1.0 - lv[i]);
    if (dmu) (*dmu)[i] = mu[i] * inv;
    if (dlv) (*dlv)[i] = 0.5 * (v - 1.0) * inv;
  }
  return kl * inv;
}

double excess_bce(const Tensor& logits, const Tensor& targets) {
  const double bce = nn::bce_with_logits(logits, targets, nullptr);
  double h = 0.0;
  for (double t : targets.vec()) {
    if (t > 0.0) h -= t * std::log(t);
    if (t < 1.0) h -= (1.0 - t) * std::log(1.0 - t);
  }
  return bce - h / static_cast<double>(targets.size());
}

namespace {

Tensor stack(const std::vector<Tensor>& data, const std::vector<std::size_t>& idx, std::size_t b, std::size_t e) {
  std::vector<Tensor> parts;
  for (std::size_t i = b; i < e; ++i) parts.push_back(data[idx[i]]);
  return concat_batch(parts);
}

}  // namespace

double vae_loss(const Vae& vae, const std::vector<Tensor>& data, double beta) {
  if (data.empty()) return 0.0;
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  double total = 0.0;
  for (std::size_t b = 0; b < data.size(); b += 32) {
    const std::size_t e = std::min(data.size(), b + 32);
    const Tensor x = stack(data, idx, b, e);
    const auto [mu, lv] = vae.encode(x, nullptr);
    const Tensor logits = vae.decode_logits(mu, nullptr);
    const double per_image = nn::bce_with_logits(logits, x, nullptr) * static_cast<double>(x.shape().sample_size());
    total += (per_image + beta * kl_divergence(mu, lv)) * static_cast<double>(e - b);
  }
  return total / static_cast<double>(data.size());
}

VaeTrainResult train_vae(Vae& vae, const std::vector<Tensor>& train, const std::vector<Tensor>& val,
                         const VaeTrainConfig& config) {
  if (train.empty()) throw Error(ErrorCode::EmptyDataset, "VAE training set is empty");
  auto& params = vae.parameters();
  nn::Adam opt(params, nn::AdamOptions{config.lr});
  Rng rng(config.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  VaeTrainResult result;
  Archive best("best");
  double best_loss = INFINITY;
  const std::size_t batch = static_cast<std::size_t>(std::max(1, config.batch));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng.engine());
    double total = 0.0;
    for (std::size_t b = 0; b < order.size(); b += batch) {
      const std::size_t e = std::min(order.size(), b + batch);
      const Tensor x = stack(train, order, b, e);
      nn::Tape tape;
      const auto [mu, lv] = vae.encode(x, &tape);
      Tensor eps;
      const Tensor z = reparametrize(mu, lv, rng, &eps);
      const Tensor logits = vae.decode_logits(z, &tape);
      Tensor dlogits, dmu, dlv;
      // Per-image sum over pixels, averaged over the batch.
      const double pixels = static_cast<double>(x.shape().sample_size());
      const double recon = nn::bce_with_logits(logits, x, &dlogits) * pixels;
      scale_inplace(dlogits, pixels);
      const double kl = kl_divergence(mu, lv, &dmu, &dlv);
      const double loss = recon + config.beta * kl;
      if (!std::isfinite(loss)) throw Error(ErrorCode::NonFiniteLoss, "VAE loss is not finite");
      params.zero_grad();
      const Tensor dz = vae.decode_backward(dlogits, tape);
      for (std::size_t i = 0; i < dz.size(); ++i) {
        dmu[i] = config.beta * dmu[i] + dz[i];
        dlv[i] = config.beta * dlv[i] + dz[i] * 0.5 * std::exp(0.5 * lv[i]) * eps[i];
      }
      vae.encode_backward(dmu, dlv, tape);
      if (!params.grads_finite()) throw Error(ErrorCode::NonFiniteGradient, "VAE gradient");
      opt.step();
      total += loss * static_cast<double>(e - b);
    }
    result.train_loss.push_back(total / static_cast<double>(train.size()));
    const double v = vae_loss(vae, val.empty() ? train : val, config.beta);
    result.val_loss.push_back(v);
    if (v < best_loss) {
      best_loss = v;
      result.best_epoch = epoch;
      params.save_to(best);
    }
    result.best_loss.push_back(best_loss);
    if (config.verbose) std::fprintf(stderr, "vae epoch %d train %.2f val %.2f\n", epoch, result.train_loss.back(), v);
  }
  if (result.best_epoch >= 0) params.load_from(best);
  return result;
}

void write_latents(const std::filesystem::path& path, const std::vector<Latent>& latents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  for (const Latent& l : latents)
    for (float v : l) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      const unsigned char b[4] = {static_cast<unsigned char>(bits), static_cast<unsigned char>(bits >> 8),
                                  static_cast<unsigned char>(bits >> 16), static_cast<unsigned char>(bits >> 24)};
      f.write(reinterpret_cast<const char*>(b), 4);
    }
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<Latent> read_latents(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  constexpr std::size_t kRecord = 4 * kLatentDim;
  if (bytes.size() % kRecord != 0)
    throw Error(ErrorCode::FormatError, path.string() + " is not a whole number of 16-float records");
  std::vector<Latent> out(bytes.size() / kRecord);
  for (std::size_t r = 0; r < out.size(); ++r)
    for (int k = 0; k < kLatentDim; ++k) {
      const unsigned char* b = bytes.data() + r * kRecord + 4 * k;
      const std::uint32_t bits = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
      std::memcpy(&out[r][k], &bits, sizeof bits);
    }
  return out;
}

Latent to_latent(const Tensor& code, int n) {
  if (code.shape().sample_size() != static_cast<std::size_t>(kLatentDim))
    throw Error(ErrorCode::ShapeMismatch, "latent tensor must hold 16 values per sample");
  Latent l;
  for (int k = 0; k < kLatentDim; ++k) l[k] = static_cast<float>(code[static_cast<std::size_t>(n) * kLatentDim + k]);
  return l;
}

Tensor from_latents(const std::vector<Latent>& latents) {
  Tensor t(static_cast<int>(latents.size()), kLatentDim, 1, 1);
  for (std::size_t n = 0; n < latents.size(); ++n)
    for (int k = 0; k < kLatentDim; ++k) t[n * kLatentDim + k] = latents[n][k];
  return t;
}

}  // namespace dummynet::appearance
