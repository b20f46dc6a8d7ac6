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

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <utility>
#include <vector>

#include "dummynet/core/rng.hpp"
#include "dummynet/core/tensor.hpp"
#include "dummynet/nn/layers.hpp"

namespace dummynet::appearance {

inline constexpr int kLatentDim = 16;
inline constexpr int kImageSize = 64;
inline constexpr const char* kVaeTag = "vae_v1";

/// Tensors are (n, 16, 1, 1). z = mu + exp(0.5 log_var) * eps.
struct AppearanceCode {
  Tensor mu, log_var, eps, z;
};

struct VaeConfig {
  int width = 16;  // encoder channels width, 2w, 4w, 4w
};

/// Encoder: four 4x4 stride-2 convs (64 -> 4) with LeakyReLU(0.2), then two
/// fully connected heads for mu and log_var. Decoder: FC to (4w, 4, 4) and
/// four 4x4 stride-2 transposed convs back to 64 x 64 x 3 logits.
class Vae {
 public:
  Vae(VaeConfig config, std::uint64_t seed);

  const VaeConfig& config() const { return config_; }

  /// Returns (mu, log_var). Throws BadResolution unless x is (n, 3, 64, 64).
  std::pair<Tensor, Tensor> encode(const Tensor& x, nn::Tape* tape) const;
  /// Input gradient given dL/dmu and dL/dlog_var (either may be empty).
  Tensor encode_backward(const Tensor& dmu, const Tensor& dlog_var, nn::Tape& tape);

  Tensor decode_logits(const Tensor& z, nn::Tape* tape) const;
  Tensor decode_backward(const Tensor& dlogits, nn::Tape& tape);
  /// Sigmoid of the decoder logits, in [0, 1].
  Tensor decode(const Tensor& z) const;

  nn::ParameterSet& encoder_parameters() { return enc_params_; }
  nn::ParameterSet& decoder_parameters() { return dec_params_; }
  nn::ParameterSet& parameters() { return all_params_; }
  const nn::ParameterSet& parameters() const { return all_params_; }

  void save(const std::filesystem::path& path) const;
  static Vae load(const std::filesystem::path& path);

 private:
  VaeConfig config_;
  std::unique_ptr<nn::Sequential> trunk_, decoder_;
  std::unique_ptr<nn::Linear> head_mu_, head_lv_;
  nn::ParameterSet enc_params_, dec_params_, all_params_;
};

/// z = mu + exp(0.5 log_var) * eps with eps ~ N(0, I) drawn from `rng`.
Tensor reparametrize(const Tensor& mu, const Tensor& log_var, Rng& rng, Tensor* eps_out = nullptr);
Tensor reparametrize(const Tensor& mu, const Tensor& log_var, std::uint64_t seed);

/// Deterministic (mu, log_var) plus one reparametrized draw.
AppearanceCode encode(const Vae& vae, const Tensor& masked_image, std::uint64_t seed);

/// Person pixels only: image with the background zeroed by the mask.
Tensor mask_background(const Tensor& image, const Tensor& mask);

/// KL(N(mu, exp(log_var)) || N(0, I)) summed over latent dims, averaged over
/// the batch; optional gradients.
double kl_divergence(const Tensor& mu, const Tensor& log_var, Tensor* dmu = nullptr, Tensor* dlog_var = nullptr);

/// Mean per-pixel BCE minus the entropy of the targets, i.e. the Bernoulli
/// KL between targets and predictions; 0 iff the reconstruction is exact.
double excess_bce(const Tensor& logits, const Tensor& targets);

struct VaeTrainConfig {
  int epochs = 20;
  int batch = 16;
  double lr = 1e-3;
  double beta = 1.0;
  std::uint64_t seed = 1;
  bool verbose = false;
};

struct VaeTrainResult {
  std::vector<double> train_loss;  // per-image (sum BCE + beta KL), epoch mean
  std::vector<double> val_loss;
  std::vector<double> best_loss;
  int best_epoch = -1;
};

/// Adam on sum-over-pixels BCE + beta * KL; keeps the epoch with the lowest
/// validation loss (training loss when `val` is empty). EmptyDataset if
/// `train` is empty.
VaeTrainResult train_vae(Vae& vae, const std::vector<Tensor>& train, const std::vector<Tensor>& val,
                         const VaeTrainConfig& config);

/// Mean per-image loss with z = mu (no sampling noise).
double vae_loss(const Vae& vae, const std::vector<Tensor>& data, double beta);

using Latent = std::array<float, kLatentDim>;
/// Headerless little-endian records of 16 float32.
void write_latents(const std::filesystem::path& path, const std::vector<Latent>& latents);
std::vector<Latent> read_latents(const std::filesystem::path& path);
Latent to_latent(const Tensor& code, int n = 0);
Tensor from_latents(const std::vector<Latent>& latents);

}  // namespace dummynet::appearance
