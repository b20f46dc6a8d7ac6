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

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "dummynet/core/tensor.hpp"
#include "dummynet/nn/layers.hpp"

namespace dummynet::gan {

inline constexpr int kCondChannels = 20;  // 3 masked background + 17 heatmaps
inline constexpr int kLatentDim = 16;
inline constexpr const char* kGeneratorTag = "gen_v1";

struct GeneratorConfig {
  int n_blocks = 2;     // output size 16 * 2^n
  int base_width = 32;  // feature channels N
  int hidden = 16;      // modulation branch width
  int output_size() const { return 16 << n_blocks; }
  int stage_size(int stage) const { return 16 << stage; }
};

/// Conditioning pyramid: level k holds the (n, 20, 16*2^k, 16*2^k) tensor,
/// k = 0..n_blocks; the last level is full resolution.
struct Conditioning {
  std::vector<Tensor> levels;
  int batch() const { return levels.empty() ? 0 : levels[0].n(); }
};

/// background * (1 - mask) concatenated with the heatmaps, area-averaged to
/// every block resolution. All inputs share (n, h, w) with h = w = 16 * 2^n.
Conditioning build_conditioning(const Tensor& background, const Tensor& mask, const Tensor& heatmaps,
                                int n_blocks);

/// Instance norm without affine, then per-pixel scale (1 + gamma) and bias
/// beta predicted from the conditioning by a shared 3x3 conv + ReLU and two
/// 3x3 convs.
class SpadeNorm {
 public:
  SpadeNorm(int channels, int hidden, Rng& rng);
  Tensor forward(const Tensor& x, const Tensor& cond, nn::Tape* tape) const;
  Tensor backward(const Tensor& dy, nn::Tape& tape);
  void register_parameters(nn::ParameterSet& set, const std::string& prefix);

 private:
  nn::InstanceNorm norm_;
  nn::Conv2d shared_, gamma_, beta_;
  nn::LeakyRelu relu_{0.0};
};

/// x + conv(act(spade(conv(act(spade(x)))))).
class SpadeResBlock {
 public:
  SpadeResBlock(int channels, int hidden, Rng& rng);
  Tensor forward(const Tensor& x, const Tensor& cond, nn::Tape* tape) const;
  Tensor backward(const Tensor& dy, nn::Tape& tape);
  void register_parameters(nn::ParameterSet& set, const std::string& prefix);

 private:
  SpadeNorm norm1_, norm2_;
  nn::Conv2d conv1_, conv2_;
  nn::LeakyRelu act_{0.2};
};

/// z -> FC -> (N, 4, 4) -> bilinear x4 -> n x [SPADE block, bilinear x2]
/// -> 3x3 conv -> sigmoid. Progressive growing keeps one RGB head per
/// stage; stage k outputs 16 * 2^k pixels, blending the previous stage's
/// upsampled output with weight 1 - alpha.
class Generator {
 public:
  Generator(GeneratorConfig config, std::uint64_t seed);

  const GeneratorConfig& config() const { return config_; }

  /// Final-stage image in [0, 1], (n, 3, s, s).
  Tensor generate(const Tensor& z, const Conditioning& cond) const;
  Tensor forward(const Tensor& z, const Conditioning& cond, int stage, double alpha, nn::Tape* tape) const;
  /// Parameter gradients for the loss gradient `dy` at the stage output.
  void backward(const Tensor& dy, int stage, double alpha, nn::Tape& tape);

  nn::ParameterSet& parameters() { return params_; }
  const nn::ParameterSet& parameters() const { return params_; }

  void save(const std::filesystem::path& path) const;
  static Generator load(const std::filesystem::path& path);

 private:
  void check_inputs(const Tensor& z, const Conditioning& cond, int stage) const;

  GeneratorConfig config_;
  std::unique_ptr<nn::Linear> fc_;
  std::vector<std::unique_ptr<SpadeResBlock>> blocks_;
  std::vector<std::unique_ptr<nn::Conv2d>> to_rgb_;
  nn::Sigmoid sigmoid_;
  nn::ParameterSet params_;
};

/// Analytic parameter count for a configuration.
std::size_t generator_parameter_count(const GeneratorConfig& config);

}  // namespace dummynet::gan
