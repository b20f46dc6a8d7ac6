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
#include <string>
#include <string_view>
#include <vector>

#include "dummynet/appearance/vae.hpp"
#include "dummynet/gan/trainer.hpp"
#include "dummynet/mask/mask_estimator.hpp"
#include "dummynet/place/placement.hpp"
#include "dummynet/pose/pose_model.hpp"
#include "dummynet/synth/world.hpp"

namespace dummynet::pipeline {

/// Generation modes: the full system and the five ablation switches.
enum class Mode { full, fixed_pose, hull_mask, gaussian_appearance, fixed_appearance, fixed_background };

std::string_view mode_name(Mode m);
/// ConfigError for unknown names.
Mode parse_mode(std::string_view name);
const std::vector<Mode>& ablation_modes();

/// Where a normalized skeleton lands in the square working canvas.
struct CanvasPlacement {
  double torso_height = 10.0;  // pixels per normalized unit
  double cx = 32.0;
  double cy = 30.0;
};

/// Medians of torso height and center over crop-space skeletons.
CanvasPlacement fit_canvas_placement(const std::vector<pose::Skeleton>& skeletons);

/// Keypoints leaving the canvas become invisible.
pose::Skeleton to_canvas(const pose::NormalizedSkeleton& ns, const CanvasPlacement& p, int size);

/// An appearance donor: a real crop and its keypoints.
struct AppearanceSource {
  Tensor image;  // (1, 3, s, s)
  pose::Skeleton skeleton;
};

/// Mean-intensity filter for appearance donors; t <= 0 keeps everything.
std::vector<AppearanceSource> filter_by_brightness(const std::vector<AppearanceSource>& sources, double max_brightness);

struct Models {
  const pose::PoseModel* poses = nullptr;
  const mask::MaskEstimator* mask = nullptr;
  const appearance::Vae* vae = nullptr;
  const gan::Generator* generator = nullptr;
  CanvasPlacement placement;
  double sigma = 2.0;  // heatmap sigma at the working size
};

struct GeneratedPerson {
  Tensor composite;  // (1, 3, s, s) person over the target background
  Tensor person;     // raw generator output
  Tensor mask;       // mask used for compositing
  pose::Skeleton skeleton;
  int donor = -1;  // index into the appearance sources, -1 when none was used
};

/// One person per target background (cycled to `count`). Donors are drawn
/// uniformly from `sources`; person i draws from its own stream of `seed`.
std::vector<GeneratedPerson> generate_people(const Models& models, const std::vector<Tensor>& backgrounds,
                                             const std::vector<AppearanceSource>& sources, int count, Mode mode,
                                             std::uint64_t seed, int workers = 1);

/// A generated person placed into a full scene: a footprint is proposed
/// from the height model, the generator works on the crop around it, and
/// the result is pasted back at the footprint.
struct SceneAugmentation {
  place::Placement placement;
  place::Insertion insertion;
  GeneratedPerson person;
};
SceneAugmentation augment_scene(const Models& models, const place::SceneContext& scene,
                                const place::HeightModel& heights, const std::vector<AppearanceSource>& sources,
                                Mode mode, std::uint64_t seed);

/// Appearance code from a donor: encoder on the crop masked by the mask estimate.
Tensor donor_code(const Models& models, const AppearanceSource& source, Rng& rng);

}  // namespace dummynet::pipeline
