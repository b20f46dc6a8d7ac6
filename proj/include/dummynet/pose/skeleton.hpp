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
#include <string>
#include <string_view>
#include <vector>

#include "dummynet/core/tensor.hpp"

namespace dummynet::pose {

inline constexpr int kNumKeypoints = 17;
inline constexpr int kNormDim = 2 * kNumKeypoints;

// COCO keypoint order.
enum Keypoint : int {
  kNose,
  kLeftEye,
  kRightEye,
  kLeftEar,
  kRightEar,
  kLeftShoulder,
  kRightShoulder,
  kLeftElbow,
  kRightElbow,
  kLeftWrist,
  kRightWrist,
  kLeftHip,
  kRightHip,
  kLeftKnee,
  kRightKnee,
  kLeftAnkle,
  kRightAnkle,
};

std::string_view keypoint_name(int k);

/// Limb segments (pairs of keypoint indices) used for drawing and masks.
const std::vector<std::array<int, 2>>& limbs();

using Visibility = std::array<bool, kNumKeypoints>;

struct Skeleton {
  std::array<double, kNumKeypoints> x{};
  std::array<double, kNumKeypoints> y{};
  Visibility visible{};
  int height = 0;
  int width = 0;

  int visible_count() const;
  /// Throws OutOfBounds if a visible keypoint lies outside the canvas.
  void validate() const;
};

/// 17 x-values then 17 y-values; invisible slots hold 0.
struct NormalizedSkeleton {
  std::array<double, kNormDim> coords{};
  Visibility visible{};

  double kx(int k) const { return coords[k]; }
  double ky(int k) const { return coords[kNumKeypoints + k]; }
};

bool filter_sample(const Skeleton& s);

struct TorsoFrame {
  double cx = 0.0;
  double cy = 0.0;
  double height = 0.0;
};

/// Torso center and height; a missing side falls back to the visible one.
TorsoFrame torso_frame(const Skeleton& s);

/// Throws DegeneratePose when the torso height is 0 or no shoulder/hip is visible.
NormalizedSkeleton normalize_skeleton(const Skeleton& s);

/// Scales a normalized skeleton so its visible extent fills `fill` of an
/// h x w canvas, centered horizontally and vertically.
Skeleton place_in_canvas(const NormalizedSkeleton& ns, int h, int w, double fill = 0.8);

/// (1, 17, H, W) unit-peak Gaussians; invisible keypoints give zero channels.
Tensor render_heatmaps(const Skeleton& s, double sigma);

struct PersonRecord {
  std::string image_id;
  std::array<double, 4> bbox{};  // x, y, w, h
  Skeleton skeleton;
};

/// One JSON object per line: {image_id, bbox, keypoints: 51 numbers, [image_size: [h, w]]}.
std::vector<PersonRecord> read_keypoints_jsonl(const std::filesystem::path& path);
void write_keypoints_jsonl(const std::filesystem::path& path, const std::vector<PersonRecord>& records);

}  // namespace dummynet::pose
