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
#include <filesystem>

#include "dummynet/core/error.hpp"
#include "dummynet/mask/mask_estimator.hpp"
#include "dummynet/synth/world.hpp"

using namespace dummynet;
using namespace dummynet::mask;

namespace {

pose::Skeleton points_skeleton(const std::vector<std::array<double, 2>>& pts, int h, int w) {
  pose::Skeleton s;
  s.height = h;
  s.width = w;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    s.x[i] = pts[i][0];
    s.y[i] = pts[i][1];
    s.visible[i] = true;
  }
  return s;
}

double dist_to_segment(double px, double py, const std::array<double, 2>& a, const std::array<double, 2>& b) {
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double t = std::clamp(((px - a[0]) * dx + (py - a[1]) * dy) / (dx * dx + dy * dy), 0.0, 1.0);
  return std::hypot(px - a[0] - t * dx, py - a[1] - t * dy);
}

}  // namespace

TEST_CASE("untrained estimator on zero heatmaps gives a valid, deterministic mask") {
  MaskEstimator m(32, 4, 7);
  const Tensor x(2, 17, 32, 32);
  const Tensor a = estimate_mask(m, x);
  CHECK(a.shape() == Shape{2, 1, 32, 32});
  for (double v : a.vec()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(max_abs_diff(a, estimate_mask(m, x)) == 0.0);
}

TEST_CASE("output stays in range for extreme finite inputs") {
  MaskEstimator m(16, 4, 8);
  Rng rng(1);
  Tensor x(1, 17, 16, 16);
  for (double& v : x.vec()) v = rng.normal(0.0, 1e3);
  const Tensor a = estimate_mask(m, x);
  CHECK(all_finite(a));
  for (double v : a.vec()) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("resolution and channel mismatches are rejected") {
  MaskEstimator m(32, 4, 7);
  CHECK_THROWS_AS(estimate_mask(m, Tensor(1, 17, 16, 16)), Error);
  CHECK_THROWS_AS(estimate_mask(m, Tensor(1, 3, 32, 32)), Error);
  try {
    estimate_mask(m, Tensor(1, 17, 64, 64));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ResolutionMismatch);
  }
}

TEST_CASE("backward matches finite differences") {
  MaskEstimator m(8, 2, 3);
  Rng rng(2);
  Tensor x(1, 17, 8, 8);
  for (double& v : x.vec()) v = rng.uniform();
  Tensor r(1, 1, 8, 8);
  for (double& v : r.vec()) v = rng.normal();
  nn::Tape tape;
  m.forward_logits(x, &tape);
  m.parameters().zero_grad();
  const Tensor gx = m.backward(r, tape);
  CHECK(tape.empty());
  auto f = [&]() {
    const Tensor y = m.forward_logits(x, nullptr);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * r[i];
    return s;
  };
  const double h = 1e-5;
  for (std::size_t i = 0; i < x.size(); i += 37) {
    const double old = x[i];
    x[i] = old + h;
    const double fp = f();
    x[i] = old - h;
    const double fm = f();
    x[i] = old;
    CHECK(gx[i] == doctest::Approx((fp - fm) / (2 * h)).epsilon(1e-5));
  }
  for (auto& [name, p] : m.parameters().entries())
    for (std::size_t i = 0; i < p->value.size(); i += 53) {
      const double old = p->value[i];
      p->value[i] = old + h;
      const double fp = f();
      p->value[i] = old - h;
      const double fm = f();
      p->value[i] = old;
      CHECK(p->grad[i] == doctest::Approx((fp - fm) / (2 * h)).epsilon(1e-5));
    }
}

TEST_CASE("hull of a square marks its interior") {
  const auto s = points_skeleton({{10, 10}, {20, 10}, {20, 20}, {10, 20}}, 32, 32);
  const Tensor m = convex_hull_mask(s, 32, 32);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      const bool in = x >= 10 && x <= 20 && y >= 10 && y <= 20;
      CHECK(m(0, 0, y, x) == (in ? 1.0 : 0.0));
    }
}

TEST_CASE("degenerate hulls throw") {
  const auto two = points_skeleton({{1, 1}, {5, 5}}, 16, 16);
  CHECK_THROWS_AS(convex_hull_mask(two, 16, 16), Error);
  const auto line = points_skeleton({{1, 1}, {3, 3}, {7, 7}, {5, 5}}, 16, 16);
  try {
    convex_hull_mask(line, 16, 16);
    FAIL("expected DegenerateHull");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateHull);
  }
}

TEST_CASE("hull pixel count agrees with the shoelace area within a boundary band") {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::array<double, 2>> pts;
    const int n = rng.uniform_int(3, 17);
    for (int i = 0; i < n; ++i) pts.push_back({rng.uniform(2, 61), rng.uniform(2, 61)});
    const auto hull = convex_hull(pts);
    if (hull.size() < 3) continue;
    // Every input point lies inside or on the hull; hull turns one way.
    for (std::size_t i = 0; i < hull.size(); ++i) {
      const auto& a = hull[i];
      const auto& b = hull[(i + 1) % hull.size()];
      const auto& c = hull[(i + 2) % hull.size()];
      CHECK((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) > 0);
      for (const auto& p : pts) CHECK((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= -1e-9);
    }
    // Independent shoelace sum over the hull vertices.
    double twice = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
      const auto& a = hull[i];
      const auto& b = hull[(i + 1) % hull.size()];
      twice += a[0] * b[1] - b[0] * a[1];
    }
    const double area = std::abs(twice) / 2;
    CHECK(polygon_area(hull) == doctest::Approx(area).epsilon(1e-12));

    const Tensor m = convex_hull_mask(points_skeleton(std::vector(pts.begin(), pts.begin() + std::min(n, 17)), 64, 64), 64, 64);
    // Disagreement is confined to pixels whose unit cell meets the boundary.
    double band = 0.0, count = 0.0;
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) {
        count += m(0, 0, y, x);
        double d = 1e9;
        for (std::size_t i = 0; i < hull.size(); ++i)
          d = std::min(d, dist_to_segment(x, y, hull[i], hull[(i + 1) % hull.size()]));
        if (d <= std::sqrt(0.5)) band += 1.0;
      }
    CHECK(std::abs(count - area) <= band);
  }
}

TEST_CASE("hull mask covers every visible keypoint pixel") {
  Rng rng(10);
  for (int i = 0; i < 100; ++i) {
    const auto c = synth::random_person_crop(rng);
    const Tensor m = convex_hull_mask(c.skeleton, 64, 64);
    for (int k = 0; k < pose::kNumKeypoints; ++k)
      if (c.skeleton.visible[k])
        CHECK(m(0, 0, static_cast<int>(std::lround(c.skeleton.y[k])), static_cast<int>(std::lround(c.skeleton.x[k]))) == 1.0);
  }
}

TEST_CASE("training memorizes a single pair and keeps the best checkpoint") {
  Rng rng(12);
  const auto c = synth::random_person_crop(rng, 32);
  const MaskSample pair{pose::render_heatmaps(c.skeleton, 1.5), c.mask};
  MaskEstimator m(32, 8, 5);
  MaskTrainConfig cfg;
  cfg.epochs = 150;
  cfg.batch = 1;
  cfg.lr = 5e-3;
  const auto result = train_mask_estimator(m, {pair}, {}, cfg);
  CHECK(mean_bce(m, {pair}) < 0.05);
  CHECK(mean_bce(m, {pair}) == doctest::Approx(result.best_loss.back()).epsilon(1e-12));
  for (std::size_t i = 1; i < result.best_loss.size(); ++i) CHECK(result.best_loss[i] <= result.best_loss[i - 1]);
  CHECK_THROWS_AS(train_mask_estimator(m, {}, {}, cfg), Error);
}

TEST_CASE("checkpoint and mask PNG round trips") {
  const auto dir = std::filesystem::temp_directory_path() / "dummynet_test_mask";
  std::filesystem::create_directories(dir);
  MaskEstimator m(16, 4, 21);
  m.save(dir / "me.bin");
  const MaskEstimator back = MaskEstimator::load(dir / "me.bin");
  Rng rng(3);
  Tensor x(1, 17, 16, 16);
  for (double& v : x.vec()) v = rng.uniform();
  CHECK(max_abs_diff(estimate_mask(m, x), estimate_mask(back, x)) == 0.0);
  CHECK(Archive::peek_tag(dir / "me.bin") == kMaskModelTag);

  Tensor mask(1, 1, 9, 7);
  for (double& v : mask.vec()) v = rng.uniform();
  write_mask_png(dir / "m.png", mask);
  const Tensor read = read_mask_png(dir / "m.png");
  CHECK(read.shape() == mask.shape());
  CHECK(max_abs_diff(read, mask) <= 0.5 / 255 + 1e-12);
  std::filesystem::remove_all(dir);
}
