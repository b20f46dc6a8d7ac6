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
#include <vector>

#include "dummynet/appearance/vae.hpp"
#include "dummynet/gan/discriminator.hpp"
#include "dummynet/gan/generator.hpp"
#include "dummynet/gan/losses.hpp"

namespace dummynet::gan {

/// One training crop at the generator's output size s.
struct GanSample {
  Tensor image;     // (1, 3, s, s) real person in context
  Tensor mask;      // (1, 1, s, s) foreground mask used for conditioning and compositing
  Tensor heatmaps;  // (1, 17, s, s)
};

struct GanTrainConfig {
  int stage_steps = 150;  // steps at every stage below the last
  int final_steps = 600;  // steps at full resolution
  int fade_steps = 75;    // alpha ramps 0 -> 1 over the first steps of a new stage
  int batch = 8;
  double lr_generator = 5e-4;
  double lr_critic = 5e-4;
  double beta1 = 0.5;
  double beta2 = 0.9;
  LossWeights weights;
  std::uint64_t seed = 0;
  std::filesystem::path log_path;  // per-step CSV when non-empty
  bool verbose = false;
};

struct GanTrainResult {
  long steps = 0;
  double last_critic_loss = 0.0;
  double last_generator_loss = 0.0;
  LossComponents last_components;
};

/// Stage and fade-in weight for a global step.
struct StageAlpha {
  int stage = 0;
  double alpha = 1.0;
};
StageAlpha stage_schedule(const GanTrainConfig& config, int n_blocks, long step);
long total_steps(const GanTrainConfig& config, int n_blocks);

/// Adversarial training. The critic sees composites M * G + (1 - M) * real at
/// full resolution; lower stages are bilinearly upsampled first. Appearance
/// codes come from the frozen encoder applied to the masked real crop.
GanTrainResult train_gan(Generator& generator, Discriminator& critic, appearance::Vae& encoder,
                         const std::vector<GanSample>& data, const GanTrainConfig& config);

/// G(z, conditioning) composited into `background` through `mask`.
struct Synthesis {
  Tensor person;     // raw generator output
  Tensor composite;  // mask * person + (1 - mask) * background
};
Synthesis synthesize(const Generator& generator, const Tensor& z, const Tensor& background, const Tensor& mask,
                     const Tensor& heatmaps);

}  // namespace dummynet::gan
