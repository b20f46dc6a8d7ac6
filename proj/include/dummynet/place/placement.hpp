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
#include <optional>
#include <vector>

#include "dummynet/core/rng.hpp"
#include "dummynet/core/tensor.hpp"

namespace dummynet::place {

enum class Label : std::uint8_t { other = 0, ground = 1, road = 2, sidewalk = 3 };

inline bool walkable(Label l) { return l == Label::ground || l == Label::road || l == Label::sidewalk; }

/// Axis-aligned box in image coordinates (origin top-left), [x, y, w, h].
struct Box {
  double x = 0, y = 0, w = 0, h = 0;
};

double iou(const Box& a, const Box& b);
double intersection(const Box& a, const Box& b);

/// Person standing at footprint (x, y_bottom); y_bottom counts rows up from
/// the bottom image edge.
struct PersonBox {
  double x = 0;
  double y_bottom = 0;
  double height = 0;
  double width = 0;
};

struct SceneContext {
  Tensor image;  // (1, 3, H, W)
  std::vector<Label> labels;  // H * W, row-major from the top
  std::vector<PersonBox> persons;

  int height() const { return image.h(); }
  int width() const { return image.w(); }
  Label label_at(int x, int y_bottom) const;
  /// Throws ShapeMismatch if labels and image disagree, OutOfBounds for persons outside.
  void validate() const;
};

Box to_image_box(const PersonBox& p, int image_height);

struct HeightModel {
  double a = 0.0;
  double b = 0.0;
  double operator()(double y) const { return a * y + b; }
};

/// Least squares over (y_bottom, height) pairs; DegenerateFit unless two y values differ.
HeightModel fit_height_model(const std::vector<std::pair<double, double>>& samples);

struct PlacementOptions {
  /// Half-width of the search window around a present person, in their heights.
  double neighborhood = 2.0;
  int attempts = 50;
  /// Persons at least this tall attract placements.
  double anchor_height = 50.0;
  /// Persons taller than this must not be overlapped.
  double protect_height = 50.0;
  /// Largest tolerated IoU with a protected person (0 = no overlap at all).
  double max_iou = 0.0;
  double aspect = 0.41;
  double min_height = 4.0;
};

struct Placement {
  int x = 0;
  int y_bottom = 0;
  double height = 0.0;
  bool near_person = false;
};

/// The complete validity rule used by propose_placement.
bool is_valid_placement(const SceneContext& scene, const HeightModel& model, int x, int y_bottom,
                        const PlacementOptions& options);

/// Tries the neighbourhood of a random anchor person first, then falls back
/// to a uniform draw over all valid footprints. Throws NoValidPlacement.
Placement propose_placement(const SceneContext& scene, const HeightModel& model, Rng& rng,
                            const PlacementOptions& options = {});

struct Insertion {
  Tensor image;   // augmented scene
  Tensor alpha;   // (1, 1, H, W) mask actually composited
  Box box;        // tight box of alpha > 0.5
};

/// Rescales patch and mask so the mask's > 0.5 extent is `placement.height`
/// tall, puts its bottom row on the footprint, horizontally centered, and
/// composites. EmptyMask if no mask pixel exceeds 0.5, OutOfBounds if the
/// person would leave the image.
Insertion insert_person(const SceneContext& scene, const Tensor& patch, const Tensor& patch_mask,
                        const Placement& placement);

}  // namespace dummynet::place
