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

inline constexpr const char* kDiscriminatorTag = "dis_v1";

/// Anything that scores (image, conditioning) with a real-valued patch map.
/// The per-sample critic value is the mean of that sample's patch map.
class Critic {
 public:
  virtual ~Critic() = default;
  virtual Tensor forward(const Tensor& image, const Tensor& cond, nn::Tape* tape) const = 0;
  /// Gradient w.r.t. the image only; parameter gradients if the tape allows.
  virtual Tensor backward(const Tensor& dscores, nn::Tape& tape) = 0;
  virtual nn::ParameterSet& parameters() = 0;
};

struct DiscriminatorConfig {
  int blocks = 4;
  int width = 16;  // channels of the first block; doubles per block, capped at 8x
};

struct CriticOutput {
  Tensor patch_scores;
  std::vector<Tensor> features;  // one per block
};

/// Conditional patch critic on concat(image, conditioning): stride-2 4x4
/// conv blocks with LeakyReLU(0.2), instance norm on all but the first,
/// then a 3x3 conv to one channel. No output nonlinearity.
class Discriminator : public Critic {
 public:
  Discriminator(DiscriminatorConfig config, int cond_channels, std::uint64_t seed);

  const DiscriminatorConfig& config() const { return config_; }

  Tensor forward(const Tensor& image, const Tensor& cond, nn::Tape* tape) const override;
  Tensor backward(const Tensor& dscores, nn::Tape& tape) override;
  nn::ParameterSet& parameters() override { return params_; }

  CriticOutput criticize(const Tensor& image, const Tensor& cond, nn::Tape* tape) const;
  /// Backward through scores and feature taps (empty tensors allowed).
  Tensor backward_taps(const Tensor& dscores, const std::vector<Tensor>& dfeatures, nn::Tape& tape);

  void save(const std::filesystem::path& path) const;
  static Discriminator load(const std::filesystem::path& path);

 private:
  Tensor input(const Tensor& image, const Tensor& cond) const;

  DiscriminatorConfig config_;
  int cond_channels_;
  std::unique_ptr<nn::Sequential> net_;
  nn::ParameterSet params_;
};

}  // namespace dummynet::gan
