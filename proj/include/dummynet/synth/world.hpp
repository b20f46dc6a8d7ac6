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
#include <vector>

#include "dummynet/core/rng.hpp"
#include "dummynet/core/tensor.hpp"
#include "dummynet/place/placement.hpp"
#include "dummynet/pose/skeleton.hpp"

// Procedural stand-in for street scenes, people, keypoints and masks.
namespace dummynet::synth {

using Rgb = std::array<double, 3>;

struct Appearance {
  Rgb shirt{};
  Rgb pants{};
  Rgb skin{};
  Rgb hair{};
  double brightness = 1.0;
};

Appearance random_appearance(Rng& rng);

/// Yaw 0 faces the camera, +-pi/2 is a profile, pi faces away.
struct BodyPose {
  double yaw = 0.0;
  double arm_abduction[2] = {0.2, 0.2};  // left, right (radians)
  double arm_swing = 0.0;
  double elbow_bend[2] = {0.2, 0.2};
  double leg_spread = 0.05;
  double stride = 0.0;
  double knee_bend = 0.1;
  double lean = 0.0;
};

BodyPose random_body_pose(Rng& rng);

/// Skeleton of a person `height` px tall whose feet touch image row
/// `foot_row` at column `foot_x`. Keypoints off the canvas become invisible;
/// self-occluded ones (profile / back views) are marked invisible too.
pose::Skeleton make_skeleton(const BodyPose& body, double foot_x, double foot_row, double height, int canvas_h,
                             int canvas_w, Rng& rng);

struct Ellipse {
  double cx, cy;  // center
  double a, b;    // semi-axes along / across `angle`
  double angle;
  int part;  // 0 head, 1 torso, 2 arm, 3 leg, 4 hair

  bool contains(double x, double y) const;
};

/// Body as a union of ellipses over limb segments, torso and head; parts
/// whose keypoints are invisible are skipped.
std::vector<Ellipse> body_shape(const pose::Skeleton& s);

/// Binary mask (1, 1, H, W) of ellipse coverage at pixel centers.
Tensor render_mask(const std::vector<Ellipse>& shape, int h, int w);

/// Paints the person into `image` (1, 3, H, W); returns the painted mask.
Tensor draw_person(Tensor& image, const std::vector<Ellipse>& shape, const Appearance& app, Rng& rng);

struct SceneOptions {
  int size = 64;
  double min_person = 20.0;
  double max_person = 44.0;
  int max_distractors = 4;
};

struct PersonInstance {
  pose::Skeleton skeleton;  // scene coordinates
  Appearance appearance;
  place::PersonBox box;
  Tensor mask;  // (1, 1, H, W)
  std::vector<Ellipse> shape;
};

struct Scene {
  place::SceneContext context;  // image, labels, persons
  Tensor background;            // the scene before people were drawn
  std::vector<PersonInstance> people;
  place::HeightModel height_model;  // the perspective used to size people
};

/// Background, semantics and distractors without people.
Scene random_background(Rng& rng, const SceneOptions& options = {});

/// Adds a person standing on a random walkable footprint sized by the
/// scene's height model. Returns false if no footprint fits.
bool add_random_person(Scene& scene, Rng& rng, const SceneOptions& options = {});

struct CropWindow {
  double x0, y0, side;
};

/// A 64 x 64 person-centred crop: the training unit for the generator,
/// the appearance encoder and the mask estimator.
struct PersonCrop {
  Tensor image;       // (1, 3, s, s) with the person
  Tensor background;  // (1, 3, s, s) same crop without the person
  Tensor mask;        // (1, 1, s, s) analytic mask in crop coordinates
  pose::Skeleton skeleton;  // crop coordinates
  Appearance appearance;
  CropWindow window;  // scene pixels
  int scene_size = 0;
};

/// Square window around the person, side = person height / fill, resized to s.
CropWindow crop_window(const place::PersonBox& box, int image_height, double fill = 0.8);
Tensor crop_resize(const Tensor& image, const CropWindow& w, int s);
pose::Skeleton skeleton_to_crop(const pose::Skeleton& s, const CropWindow& w, int size);

PersonCrop random_person_crop(Rng& rng, int size = 64);

}  // namespace dummynet::synth
