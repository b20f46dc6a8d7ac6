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
#include <vector>

#include "dummynet/core/tensor.hpp"
#include "dummynet/nn/layers.hpp"

namespace dummynet::eval {

inline constexpr const char* kClassifierTag = "cls_v1";
inline constexpr std::array<int, 4> kClassifierWidths = {5, 10, 16, 32};
inline constexpr std::size_t kClassifierParams = 6729;

/// 4 x [3x3 conv stride 2 pad 1, ReLU, 2x2 max pool (ceil)] -> FC -> sigmoid.
/// With widths (5, 10, 16, 32) on 3-channel input: 6,729 parameters.
class Classifier {
 public:
  explicit Classifier(std::uint64_t seed, std::array<int, 4> widths = kClassifierWidths);

  /// Probabilities (n, 1, 1, 1). Inputs are (n, 3, h, w); 64 x 64 reduces to 1 x 1.
  Tensor predict(const Tensor& images) const;
  Tensor logits(const Tensor& images, nn::Tape* tape) const;
  void backward(const Tensor& dlogits, nn::Tape& tape);

  nn::ParameterSet& parameters() { return params_; }
  const nn::ParameterSet& parameters() const { return params_; }

  void save(const std::filesystem::path& path) const;
  static Classifier load(const std::filesystem::path& path);

 private:
  std::array<int, 4> widths_;
  std::unique_ptr<nn::Sequential> net_;
  nn::ParameterSet params_;
};

/// Conv + bias per layer, then the 1-output head.
std::size_t classifier_parameter_count(std::array<int, 4> widths, int in_channels = 3);

struct ClassifierTrainConfig {
  int epochs = 60;
  int batch = 16;
  double lr = 0.05;
  double momentum = 0.9;
  double val_fraction = 0.2;  // of each class, held out for checkpoint selection
  std::uint64_t seed = 0;
  bool verbose = false;
};

struct ClassifierTrainResult {
  int best_epoch = -1;
  double best_val_error = 1.0;
  double best_val_loss = 0.0;
  std::vector<double> train_loss;
};

/// SGD on class-balanced binary cross-entropy. Keeps the epoch with the
/// lowest validation error (ties broken by validation loss). Throws
/// EmptyDataset if either class is empty.
ClassifierTrainResult train_classifier(Classifier& model, const std::vector<Tensor>& pos,
                                       const std::vector<Tensor>& neg, const ClassifierTrainConfig& config);

/// Scores for a list of (1, 3, h, w) images, batched.
std::vector<double> score_images(const Classifier& model, const std::vector<Tensor>& images);

}  // namespace dummynet::eval
