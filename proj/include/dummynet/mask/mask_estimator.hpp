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
#include <array>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "dummynet/core/rng.hpp"
#include "dummynet/core/tensor.hpp"
#include "dummynet/nn/layers.hpp"
#include "dummynet/pose/skeleton.hpp"

namespace dummynet::mask {

inline constexpr const char* kMaskModelTag = "me_v1";

/// U-Net from keypoint heatmaps (n, 17, R, R) to mask logits (n, 1, R, R).
/// Four resolution levels, channel width doubling per level, skip
/// connections by concatenation.
class MaskEstimator {
 public:
  MaskEstimator(int resolution, int base_width, std::uint64_t seed);

  int resolution() const { return resolution_; }
  int base_width() const { return width_; }

  Tensor forward_logits(const Tensor& heatmaps, nn::Tape* tape) const;
  /// Gradient w.r.t. the heatmaps; accumulates parameter gradients.
  Tensor backward(const Tensor& dlogits, nn::Tape& tape);

  nn::ParameterSet& parameters() { return params_; }
  const nn::ParameterSet& parameters() const { return params_; }

  void save(const std::filesystem::path& path) const;
  static MaskEstimator load(const std::filesystem::path& path);

 private:
  int resolution_, width_;
  std::vector<std::unique_ptr<nn::Conv2d>> convs_;  // e1 e2 e3 bottleneck d3 d2 d1 head
  nn::LeakyRelu act_{0.1};
  nn::MaxPool2 pool_;
  nn::Upsample2 up_;
  nn::ParameterSet params_;
};

/// Soft mask in [0, 1], shape (n, 1, R, R). Throws ResolutionMismatch unless
/// the input is (n, 17, R, R) at the model's resolution.
Tensor estimate_mask(const MaskEstimator& model, const Tensor& heatmaps);

/// Heatmaps rendered at the model's resolution, then estimate_mask.
Tensor estimate_mask(const MaskEstimator& model, const pose::Skeleton& skeleton, double sigma);

struct MaskSample {
  Tensor heatmaps;  // (1, 17, R, R)
  Tensor mask;      // (1, 1, R, R), targets in [0, 1]
};

struct MaskTrainConfig {
  int epochs = 8;
  int batch = 8;
  double lr = 2e-3;
  std::uint64_t seed = 1;
  bool verbose = false;
};

struct MaskTrainResult {
  std::vector<double> train_loss;  // mean BCE per epoch
  std::vector<double> val_loss;    // BCE of the selection set after each epoch
  std::vector<double> best_loss;   // running minimum of val_loss
  int best_epoch = -1;
};

/// Adam on per-pixel BCE. The returned model holds the weights of the epoch
/// with the lowest validation BCE (training BCE if `val` is empty).
/// Throws EmptyDataset when `train` is empty.
MaskTrainResult train_mask_estimator(MaskEstimator& model, const std::vector<MaskSample>& train,
                                     const std::vector<MaskSample>& val, const MaskTrainConfig& config);

double mean_bce(const MaskEstimator& model, const std::vector<MaskSample>& data);

/// Intersection over union of the sets {pred > t} and {target > t}; 1 when both are empty.
double mask_iou(const Tensor& pred, const Tensor& target, double threshold = 0.5);

/// Convex hull of points, counter-clockwise in image axes, collinear points
/// dropped (monotone chain).
std::vector<std::array<double, 2>> convex_hull(std::vector<std::array<double, 2>> points);

/// Polygon area by the shoelace formula (absolute value).
double polygon_area(const std::vector<std::array<double, 2>>& poly);

/// Binary mask (1, 1, h, w): 1 at pixel centers inside or on the hull of the
/// visible keypoints, and at the pixel holding each visible keypoint. Throws DegenerateHull for fewer than 3 visible or
/// collinear keypoints.
Tensor convex_hull_mask(const pose::Skeleton& skeleton, int h, int w);

/// 8-bit grayscale PNG, 0..255 linear in [0, 1].
void write_mask_png(const std::filesystem::path& path, const Tensor& mask);
Tensor read_mask_png(const std::filesystem::path& path);

}  // namespace dummynet::mask
