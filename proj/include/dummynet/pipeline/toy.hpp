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
#include <functional>
#include <string>
#include <vector>

#include "dummynet/eval/classifier.hpp"
#include "dummynet/eval/metrics.hpp"
#include "dummynet/gan/discriminator.hpp"
#include "dummynet/gan/trainer.hpp"
#include "dummynet/pipeline/augment.hpp"

// The 64 x 64 person / no-person task and the models behind its augmentation.
namespace dummynet::pipeline {

struct ToyConfig {
  // External person corpus used for pretraining pose, mask, appearance and GAN.
  int corpus_size = 800;
  // Classifier data.
  int real_positives = 50;
  int train_negatives = 400;
  int generated_positives = 200;
  int test_positives = 300;
  int test_negatives = 600;
  int classifier_epochs = 60;

  double sigma = 2.0;
  pose::PoseModelConfig pose;
  int mask_width = 16;
  int mask_epochs = 4;
  int vae_width = 16;
  int vae_epochs = 30;
  double vae_lr = 2e-3;
  gan::GeneratorConfig generator;
  gan::DiscriminatorConfig critic;
  gan::GanTrainConfig gan;

  ToyConfig();
};

struct ToyData {
  std::vector<synth::PersonCrop> corpus;
  std::vector<AppearanceSource> real_positives;  // images with keypoints
  std::vector<Tensor> train_negatives;
  std::vector<Tensor> test_positives;
  std::vector<Tensor> test_negatives;
  std::vector<Tensor> backgrounds;  // person-free crops for generated positives
};

/// Every split is drawn from its own derived stream.
ToyData make_toy_data(const ToyConfig& config, std::uint64_t seed, int workers = 1);

struct TrainedModels {
  pose::PoseModel poses;
  mask::MaskEstimator mask;
  appearance::Vae vae;
  gan::Generator generator;
  gan::Discriminator critic;
  CanvasPlacement placement;
  double sigma = 2.0;

  Models view() const;
};

using Progress = std::function<void(const std::string&)>;

pose::PoseModel fit_corpus_poses(const ToyConfig& c, const std::vector<synth::PersonCrop>& corpus);
mask::MaskEstimator train_corpus_mask(const ToyConfig& c, const std::vector<synth::PersonCrop>& corpus,
                                      std::uint64_t seed, bool verbose = false);
/// Crops masked by the mask estimate, the encoder's training inputs.
std::vector<Tensor> masked_crops(const std::vector<synth::PersonCrop>& crops, const mask::MaskEstimator& me,
                                 double sigma);
appearance::Vae train_corpus_vae(const ToyConfig& c, const std::vector<synth::PersonCrop>& corpus,
                                 const mask::MaskEstimator& me, std::uint64_t seed, bool verbose = false);
std::vector<gan::GanSample> gan_samples(const std::vector<synth::PersonCrop>& crops, const mask::MaskEstimator& me,
                                        double sigma);

/// All four pretraining stages in order.
TrainedModels pretrain(const ToyConfig& config, const std::vector<synth::PersonCrop>& corpus, std::uint64_t seed,
                       const Progress& progress = {});

/// Trains the tiny classifier on (pos, neg) and scores the test split.
eval::MetricsReport evaluate_classifier(const ToyConfig& config, const std::vector<Tensor>& pos,
                                        const std::vector<Tensor>& neg, const ToyData& data, std::uint64_t seed);

std::vector<Tensor> composites(const std::vector<GeneratedPerson>& people);

}  // namespace dummynet::pipeline
