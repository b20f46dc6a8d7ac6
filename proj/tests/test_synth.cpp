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

#include <doctest.h>

#include <cmath>

#include "dummynet/pose/skeleton.hpp"
#include "dummynet/synth/world.hpp"

using namespace dummynet;
using namespace dummynet::synth;

TEST_CASE("ellipse containment matches the rotated quadratic form") {
  const Ellipse e{10.0, 5.0, 4.0, 1.0, M_PI / 2, 1};
  CHECK(e.contains(10.0, 8.9));
  CHECK_FALSE(e.contains(12.0, 5.0));
  CHECK(e.contains(10.9, 5.0));
}

TEST_CASE("generated skeletons pass validation and mostly pass the filter") {
  Rng rng(3);
  int accepted = 0;
  for (int i = 0; i < 500; ++i) {
    const BodyPose body = random_body_pose(rng);
    const pose::Skeleton s = make_skeleton(body, 50.0, 90.0, 70.0, 100, 100, rng);
    CHECK_NOTHROW(s.validate());
    for (int k = 0; k < pose::kNumKeypoints; ++k)
      if (s.visible[k]) {
        CHECK(s.x[k] >= 0.0);
        CHECK(s.y[k] < 100.0);
      }
    accepted += pose::filter_sample(s) ? 1 : 0;
  }
  CHECK(accepted > 400);
}

TEST_CASE("painted pixels equal the analytic mask") {
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const pose::Skeleton s = make_skeleton(random_body_pose(rng), 32.0, 60.0, 44.0, 64, 64, rng);
    const auto shape = body_shape(s);
    if (shape.empty()) continue;
    Tensor img(1, 3, 64, 64, 0.5);
    const Tensor painted = draw_person(img, shape, random_appearance(rng), rng);
    const Tensor analytic = render_mask(shape, 64, 64);
    CHECK(max_abs_diff(painted, analytic) == 0.0);
    // Visible torso keypoints lie inside the silhouette.
    for (int k : {pose::kLeftShoulder, pose::kRightShoulder, pose::kLeftHip, pose::kRightHip})
      if (s.visible[k]) {
        bool inside = false;
        for (const auto& e : shape) inside = inside || e.contains(s.x[k], s.y[k]);
        CHECK(inside);
      }
  }
}

TEST_CASE("scene people stand on walkable ground with the scene's perspective") {
  Rng rng(5);
  int placed = 0;
  for (int i = 0; i < 100; ++i) {
    Scene sc = random_background(rng);
    CHECK(sc.context.labels.size() == 64u * 64u);
    CHECK_NOTHROW(sc.context.validate());
    if (!add_random_person(sc, rng)) continue;
    ++placed;
    const auto& p = sc.people.back();
    const int row = 63 - static_cast<int>(p.box.y_bottom);
    const int col = std::clamp(static_cast<int>(p.box.x), 0, 63);
    CHECK(row >= 0);
    // Feet touch ground somewhere on the bottom mask row.
    bool walk = false;
    for (int c = 0; c < 64; ++c)
      if (p.mask(0, 0, row, c) > 0.5 && place::walkable(sc.context.label_at(c, p.box.y_bottom))) walk = true;
    CHECK(walk);
    CHECK(p.box.height >= 10.0);
    CHECK(p.box.height <= 50.0);
    (void)col;
    // The background copy excludes the person.
    CHECK(max_abs_diff(sc.background, sc.context.image) > 0.0);
  }
  CHECK(placed > 80);
}

TEST_CASE("person crops keep the person centered with a sane fill") {
  Rng rng(6);
  for (int i = 0; i < 30; ++i) {
    const PersonCrop c = random_person_crop(rng);
    REQUIRE(c.image.shape() == Shape{1, 3, 64, 64});
    REQUIRE(c.mask.shape() == Shape{1, 1, 64, 64});
    const double fill = sum(c.mask) / (64.0 * 64.0);
    CHECK(fill > 0.08);
    CHECK(fill < 0.5);
    CHECK(pose::filter_sample(c.skeleton));
    // Outside the mask the crop matches the background to resampling error.
    double worst = 0.0;
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) {
        bool near = false;
        for (int dy = -3; dy <= 3 && !near; ++dy)
          for (int dx = -3; dx <= 3 && !near; ++dx) {
            const int yy = std::clamp(y + dy, 0, 63), xx = std::clamp(x + dx, 0, 63);
            near = c.mask(0, 0, yy, xx) > 0.5;
          }
        if (near) continue;
        // Border-clamped samples may replicate person pixels.
        const double step = c.window.side / 64.0;
        const double sx = c.window.x0 + (x + 0.5) * step - 0.5, sy = c.window.y0 + (y + 0.5) * step - 0.5;
        if (sx < 0 || sy < 0 || sx > c.scene_size - 1 || sy > c.scene_size - 1) continue;
        for (int ch = 0; ch < 3; ++ch) worst = std::max(worst, std::abs(c.image(0, ch, y, x) - c.background(0, ch, y, x)));
      }
    CHECK(worst < 1e-12);
  }
}
