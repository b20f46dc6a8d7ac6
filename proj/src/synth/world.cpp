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

#include "dummynet/synth/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dummynet/core/error.hpp"

namespace dummynet::synth {

using pose::Skeleton;
using namespace pose;  // keypoint names

namespace {

constexpr double kPi = std::numbers::pi;

Rgb jitter(const Rgb& c, Rng& rng, double amount) {
  Rgb out;
  for (int i = 0; i < 3; ++i) out[i] = std::clamp(c[i] + rng.normal(0.0, amount), 0.0, 1.0);
  return out;
}

Rgb hsv(double h, double s, double v) {
  const double c = v * s;
  const double hp = std::fmod(h, 1.0) * 6.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  Rgb rgb{};
  if (hp < 1) rgb = {c, x, 0};
  else if (hp < 2) rgb = {x, c, 0};
  else if (hp < 3) rgb = {0, c, x};
  else if (hp < 4) rgb = {0, x, c};
  else if (hp < 5) rgb = {x, 0, c};
  else rgb = {c, 0, x};
  for (double& v_ : rgb) v_ += v - c;
  return rgb;
}

void put(Tensor& img, int x, int y, const Rgb& c) {
  if (x < 0 || y < 0 || x >= img.w() || y >= img.h()) return;
  for (int k = 0; k < 3; ++k) img(0, k, y, x) = c[k];
}

Rgb scale(const Rgb& c, double s) { return {c[0] * s, c[1] * s, c[2] * s}; }

}  // namespace

Appearance random_appearance(Rng& rng) {
  Appearance a;
  a.shirt = hsv(rng.uniform(), rng.uniform(0.3, 0.95), rng.uniform(0.3, 0.95));
  a.pants = rng.bernoulli(0.5) ? hsv(rng.uniform(0.55, 0.7), rng.uniform(0.3, 0.8), rng.uniform(0.15, 0.5))
                               : hsv(rng.uniform(), rng.uniform(0.0, 0.6), rng.uniform(0.1, 0.7));
  static const Rgb skins[] = {{0.96, 0.80, 0.69}, {0.87, 0.67, 0.52}, {0.67, 0.47, 0.34}, {0.45, 0.31, 0.22}};
  a.skin = jitter(skins[rng.uniform_int(0, 3)], rng, 0.03);
  a.hair = hsv(rng.uniform(0.02, 0.12), rng.uniform(0.2, 0.8), rng.uniform(0.05, 0.6));
  a.brightness = rng.uniform(0.55, 1.1);
  return a;
}

BodyPose random_body_pose(Rng& rng) {
  BodyPose p;
  const double r = rng.uniform();
  if (r < 0.4)
    p.yaw = rng.normal(0.0, 0.25);
  else if (r < 0.7)
    p.yaw = (rng.bernoulli(0.5) ? 1 : -1) * kPi / 2 + rng.normal(0.0, 0.25);
  else if (r < 0.85)
    p.yaw = kPi + rng.normal(0.0, 0.25);
  else
    p.yaw = rng.uniform(-kPi, kPi);
  for (int i = 0; i < 2; ++i) {
    p.arm_abduction[i] = rng.bernoulli(0.12) ? rng.uniform(1.2, 2.6) : std::abs(rng.normal(0.15, 0.15));
    p.elbow_bend[i] = std::abs(rng.normal(0.3, 0.4));
  }
  p.arm_swing = rng.normal(0.0, 0.45);
  p.leg_spread = std::abs(rng.normal(0.06, 0.06));
  p.stride = rng.normal(0.0, 0.3);
  p.knee_bend = std::abs(rng.normal(0.15, 0.2));
  p.lean = rng.normal(0.0, 0.06);
  return p;
}

Skeleton make_skeleton(const BodyPose& body, double foot_x, double foot_row, double height, int canvas_h,
                       int canvas_w, Rng& rng) {
  const double h = height;
  const double cy = std::cos(body.yaw), sy = std::sin(body.yaw);
  const double facing = sy >= 0 ? 1.0 : -1.0;
  std::array<double, kNumKeypoints> x{}, y{};

  // Local frame: x relative to the body axis, y down from the head top.
  auto set = [&](int k, double lx, double ly) {
    x[k] = lx;
    y[k] = ly;
  };
  set(kNose, 0.045 * h * sy, 0.085 * h);
  set(kLeftEye, 0.025 * h * cy + 0.035 * h * sy, 0.07 * h);
  set(kRightEye, -0.025 * h * cy + 0.035 * h * sy, 0.07 * h);
  set(kLeftEar, 0.05 * h * cy - 0.01 * h * sy, 0.075 * h);
  set(kRightEar, -0.05 * h * cy - 0.01 * h * sy, 0.075 * h);
  set(kLeftShoulder, 0.115 * h * cy, 0.19 * h);
  set(kRightShoulder, -0.115 * h * cy, 0.19 * h);
  set(kLeftHip, 0.07 * h * cy, 0.52 * h);
  set(kRightHip, -0.07 * h * cy, 0.52 * h);

  const int shoulder[2] = {kLeftShoulder, kRightShoulder};
  const int elbow[2] = {kLeftElbow, kRightElbow};
  const int wrist[2] = {kLeftWrist, kRightWrist};
  const int hip[2] = {kLeftHip, kRightHip};
  const int knee[2] = {kLeftKnee, kRightKnee};
  const int ankle[2] = {kLeftAnkle, kRightAnkle};
  const double cos_sign = cy >= 0 ? 1.0 : -1.0;
  for (int i = 0; i < 2; ++i) {
    const double out = (i == 0 ? 1.0 : -1.0) * cos_sign;  // image-space outward direction
    const double swing = (i == 0 ? 1.0 : -1.0) * body.arm_swing * sy;
    const double t1 = out * body.arm_abduction[i] * std::sqrt(std::abs(cy)) + swing;
    x[elbow[i]] = x[shoulder[i]] + 0.17 * h * std::sin(t1);
    y[elbow[i]] = y[shoulder[i]] + 0.17 * h * std::cos(t1);
    const double t2 = t1 + body.elbow_bend[i] * (0.3 * out + facing * std::abs(sy));
    x[wrist[i]] = x[elbow[i]] + 0.15 * h * std::sin(t2);
    y[wrist[i]] = y[elbow[i]] + 0.15 * h * std::cos(t2);

    const double p1 = out * body.leg_spread + (i == 0 ? 1.0 : -1.0) * body.stride * sy;
    x[knee[i]] = x[hip[i]] + 0.25 * h * std::sin(p1);
    y[knee[i]] = y[hip[i]] + 0.25 * h * std::cos(p1);
    const double p2 = p1 - body.knee_bend * facing * std::abs(sy);
    x[ankle[i]] = x[knee[i]] + 0.23 * h * std::sin(p2);
    y[ankle[i]] = y[knee[i]] + 0.23 * h * std::cos(p2);
  }
  // Lean the upper body about the hip center.
  const double hx = 0.5 * (x[kLeftHip] + x[kRightHip]), hy = 0.5 * (y[kLeftHip] + y[kRightHip]);
  const double cl = std::cos(body.lean), sl = std::sin(body.lean);
  for (int k = 0; k <= kRightWrist; ++k) {
    const double dx = x[k] - hx, dy = y[k] - hy;
    x[k] = hx + cl * dx - sl * dy;
    y[k] = hy + sl * dx + cl * dy;
  }
  const double lowest = std::max(y[kLeftAnkle], y[kRightAnkle]);
  const double shift = 0.965 * h - lowest;

  Skeleton s;
  s.height = canvas_h;
  s.width = canvas_w;
  for (int k = 0; k < kNumKeypoints; ++k) {
    s.x[k] = foot_x + x[k];
    s.y[k] = foot_row - h + y[k] + shift;
    s.visible[k] = true;
  }
  // Self-occlusion by viewpoint.
  const double ay = std::abs(std::remainder(body.yaw, 2 * kPi));
  if (ay > 0.65 * kPi) {
    s.visible[kNose] = s.visible[kLeftEye] = s.visible[kRightEye] = false;
  } else if (ay > 0.3 * kPi) {
    // The far side is the one pushed behind the body by the rotation.
    const bool left_far = (std::remainder(body.yaw, 2 * kPi) < 0);
    const int side = left_far ? 0 : 1;
    const int eye[2] = {kLeftEye, kRightEye};
    const int ear[2] = {kLeftEar, kRightEar};
    s.visible[eye[side]] = false;
    s.visible[ear[side]] = false;
    if (rng.bernoulli(0.5)) s.visible[shoulder[side]] = false;
    if (rng.bernoulli(0.5)) s.visible[elbow[side]] = false;
    if (rng.bernoulli(0.5)) s.visible[wrist[side]] = false;
    if (rng.bernoulli(0.4)) s.visible[hip[side]] = false;
  }
  if (rng.bernoulli(0.05)) s.visible[kLeftAnkle] = s.visible[kRightAnkle] = false;
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (s.x[k] < 0 || s.x[k] >= canvas_w || s.y[k] < 0 || s.y[k] >= canvas_h) s.visible[k] = false;
    if (!s.visible[k]) s.x[k] = s.y[k] = 0.0;
  }
  return s;
}

bool Ellipse::contains(double x, double y) const {
  const double dx = x - cx, dy = y - cy;
  const double c = std::cos(angle), s = std::sin(angle);
  const double u = (dx * c + dy * s) / a;
  const double v = (-dx * s + dy * c) / b;
  return u * u + v * v <= 1.0;
}

std::vector<Ellipse> body_shape(const Skeleton& s) {
  std::vector<Ellipse> out;
  TorsoFrame f;
  try {
    f = torso_frame(s);
  } catch (const Error&) {
    return out;
  }
  if (!(f.height > 0)) return out;
  const double t = f.height;
  auto segment = [&](int a, int b, double thick, int part) {
    if (!s.visible[a] || !s.visible[b]) return;
    const double dx = s.x[b] - s.x[a], dy = s.y[b] - s.y[a];
    const double len = std::hypot(dx, dy);
    out.push_back({0.5 * (s.x[a] + s.x[b]), 0.5 * (s.y[a] + s.y[b]), 0.5 * len + 0.5 * thick, 0.5 * thick,
                   std::atan2(dy, dx), part});
  };
  // Shoulder and hip centers from the torso frame.
  double sx = 0, sy_ = 0, n = 0;
  for (int k : {kLeftShoulder, kRightShoulder})
    if (s.visible[k]) sx += s.x[k], sy_ += s.y[k], n += 1;
  sx /= n;
  sy_ /= n;
  const double hx = 2 * f.cx - sx, hy = 2 * f.cy - sy_;
  const double axis = std::atan2(sy_ - hy, sx - hx);

  // Joints to the torso center, so every visible shoulder and hip is covered.
  auto to_center = [&](int k, double thick, int part) {
    if (!s.visible[k]) return;
    const double dx = f.cx - s.x[k], dy = f.cy - s.y[k];
    out.push_back({0.5 * (s.x[k] + f.cx), 0.5 * (s.y[k] + f.cy), 0.5 * std::hypot(dx, dy) + 0.5 * thick,
                   0.5 * thick, std::atan2(dy, dx), part});
  };
  to_center(kLeftHip, 0.34 * t, 3);
  to_center(kRightHip, 0.34 * t, 3);
  segment(kLeftHip, kLeftKnee, 0.34 * t, 3);
  segment(kLeftKnee, kLeftAnkle, 0.28 * t, 3);
  segment(kRightHip, kRightKnee, 0.34 * t, 3);
  segment(kRightKnee, kRightAnkle, 0.28 * t, 3);
  for (int k : {kLeftAnkle, kRightAnkle})
    if (s.visible[k]) out.push_back({s.x[k], s.y[k] + 0.04 * t, 0.16 * t, 0.08 * t, 0.0, 3});

  double half_w = 0.3 * t;
  if (s.visible[kLeftShoulder] && s.visible[kRightShoulder])
    half_w = std::max(half_w, 0.55 * std::hypot(s.x[kLeftShoulder] - s.x[kRightShoulder],
                                                 s.y[kLeftShoulder] - s.y[kRightShoulder]));
  out.push_back({f.cx, f.cy, 0.62 * t, half_w, axis, 1});

  to_center(kLeftShoulder, 0.3 * t, 1);
  to_center(kRightShoulder, 0.3 * t, 1);
  segment(kLeftShoulder, kLeftElbow, 0.24 * t, 2);
  segment(kRightShoulder, kRightElbow, 0.24 * t, 2);
  segment(kLeftElbow, kLeftWrist, 0.2 * t, 5);
  segment(kRightElbow, kRightWrist, 0.2 * t, 5);

  double fx = 0, fy = 0, m = 0;
  for (int k : {kNose, kLeftEye, kRightEye, kLeftEar, kRightEar})
    if (s.visible[k]) fx += s.x[k], fy += s.y[k], m += 1;
  const double r = 0.36 * t;
  if (m > 0) {
    fx /= m;
    fy /= m;
    fy -= 0.1 * r;
  } else {
    fx = sx + std::cos(axis) * 0.62 * t;
    fy = sy_ + std::sin(axis) * 0.62 * t;
  }
  out.push_back({fx, fy, 1.12 * r, 0.9 * r, axis, 0});
  out.push_back({fx + std::cos(axis) * 0.45 * r, fy + std::sin(axis) * 0.45 * r, 0.7 * r, 0.92 * r, axis, 4});
  return out;
}

Tensor render_mask(const std::vector<Ellipse>& shape, int h, int w) {
  Tensor m(1, 1, h, w);
  for (const auto& e : shape) {
    const double r = std::max(e.a, e.b);
    const int y0 = std::max(0, static_cast<int>(std::floor(e.cy - r))), y1 = std::min(h - 1, static_cast<int>(std::ceil(e.cy + r)));
    const int x0 = std::max(0, static_cast<int>(std::floor(e.cx - r))), x1 = std::min(w - 1, static_cast<int>(std::ceil(e.cx + r)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (e.contains(x, y)) m(0, 0, y, x) = 1.0;
  }
  return m;
}

Tensor draw_person(Tensor& image, const std::vector<Ellipse>& shape, const Appearance& app, Rng& rng) {
  const int h = image.h(), w = image.w();
  Tensor mask(1, 1, h, w);
  const bool long_sleeves = app.shirt[0] + app.shirt[1] > 0.9;
  for (const auto& e : shape) {
    Rgb base{};
    switch (e.part) {
      case 0: base = app.skin; break;
      case 1: case 2: base = app.shirt; break;
      case 3: base = app.pants; break;
      case 4: base = app.hair; break;
      default: base = long_sleeves ? app.shirt : app.skin; break;
    }
    const double r = std::max(e.a, e.b);
    const int y0 = std::max(0, static_cast<int>(std::floor(e.cy - r))), y1 = std::min(h - 1, static_cast<int>(std::ceil(e.cy + r)));
    const int x0 = std::max(0, static_cast<int>(std::floor(e.cx - r))), x1 = std::min(w - 1, static_cast<int>(std::ceil(e.cx + r)));
    const double c = std::cos(e.angle), s = std::sin(e.angle);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        if (!e.contains(x, y)) continue;
        // Cylinder-like shading across the minor axis.
        const double v = (-(x - e.cx) * s + (y - e.cy) * c) / e.b;
        const double shade = app.brightness * (1.0 - 0.25 * v * v);
        Rgb col = scale(base, shade);
        for (double& ch : col) ch = std::clamp(ch + rng.normal(0.0, 0.015), 0.0, 1.0);
        put(image, x, y, col);
        mask(0, 0, y, x) = 1.0;
      }
  }
  return mask;
}

namespace {

void fill_rect(Tensor& img, std::vector<place::Label>* labels, int x0, int y0, int x1, int y1, const Rgb& c,
               place::Label label = place::Label::other) {
  for (int y = std::max(0, y0); y < std::min(img.h(), y1); ++y)
    for (int x = std::max(0, x0); x < std::min(img.w(), x1); ++x) {
      put(img, x, y, c);
      if (labels) (*labels)[static_cast<std::size_t>(y) * img.w() + x] = label;
    }
}

void fill_ellipse(Tensor& img, std::vector<place::Label>* labels, double cx, double cy, double rx, double ry,
                  const Rgb& c) {
  for (int y = static_cast<int>(cy - ry) - 1; y <= cy + ry + 1; ++y)
    for (int x = static_cast<int>(cx - rx) - 1; x <= cx + rx + 1; ++x) {
      if (x < 0 || y < 0 || x >= img.w() || y >= img.h()) continue;
      const double u = (x - cx) / rx, v = (y - cy) / ry;
      if (u * u + v * v > 1.0) continue;
      put(img, x, y, c);
      if (labels) (*labels)[static_cast<std::size_t>(y) * img.w() + x] = place::Label::other;
    }
}

}  // namespace

Scene random_background(Rng& rng, const SceneOptions& options) {
  const int S = options.size;
  Scene scene;
  Tensor& img = scene.context.image;
  img = Tensor(1, 3, S, S);
  auto& labels = scene.context.labels;
  labels.assign(static_cast<std::size_t>(S) * S, place::Label::other);
  const double light = rng.uniform(0.5, 1.1);
  const int hz = rng.uniform_int(S / 4, S * 7 / 16);

  const Rgb sky_top = jitter({0.45, 0.6, 0.85}, rng, 0.08), sky_low = jitter({0.75, 0.8, 0.85}, rng, 0.06);
  for (int y = 0; y < hz; ++y) {
    const double t = static_cast<double>(y) / std::max(1, hz - 1);
    for (int x = 0; x < S; ++x)
      put(img, x, y, {sky_top[0] * (1 - t) + sky_low[0] * t, sky_top[1] * (1 - t) + sky_low[1] * t,
                      sky_top[2] * (1 - t) + sky_low[2] * t});
  }
  for (int x = rng.uniform_int(-6, 0); x < S;) {
    const int bw = rng.uniform_int(6, 18);
    const int top = rng.uniform_int(1, std::max(2, hz - 4));
    const Rgb col = hsv(rng.uniform(), rng.uniform(0.05, 0.35), rng.uniform(0.35, 0.8));
    fill_rect(img, nullptr, x, top, x + bw, hz, col);
    const Rgb win = scale(col, rng.bernoulli(0.5) ? 0.6 : 1.3);
    for (int wy = top + 2; wy < hz - 2; wy += 4)
      for (int wx = x + 2; wx < x + bw - 2; wx += 4) fill_rect(img, nullptr, wx, wy, wx + 2, wy + 2, win);
    x += bw + rng.uniform_int(0, 4);
  }

  // Walkable bands from the horizon down.
  const Rgb road = jitter({0.36, 0.36, 0.38}, rng, 0.04), walk = jitter({0.62, 0.58, 0.52}, rng, 0.05),
            grass = jitter({0.3, 0.5, 0.22}, rng, 0.06);
  int y = hz;
  const int walk1 = hz + rng.uniform_int(3, 9);
  const int road_end = std::min(S, walk1 + rng.uniform_int(10, 22));
  const bool grass_first = rng.bernoulli(0.3);
  for (; y < S; ++y) {
    place::Label l;
    Rgb c{};
    if (y < walk1) {
      l = grass_first ? place::Label::ground : place::Label::sidewalk;
      c = grass_first ? grass : walk;
    } else if (y < road_end) {
      l = place::Label::road;
      c = road;
    } else {
      l = place::Label::sidewalk;
      c = walk;
    }
    fill_rect(img, &labels, 0, y, S, y + 1, c, l);
  }
  if (road_end - walk1 > 6) {
    const int my = (walk1 + road_end) / 2;
    for (int x = rng.uniform_int(0, 5); x < S; x += 8) fill_rect(img, nullptr, x, my, x + 4, my + 1, {0.9, 0.9, 0.85});
  }

  // Perspective: people shrink to ~8 px at the horizon.
  const double b = rng.uniform(options.max_person + 2, options.max_person + 8);
  scene.height_model = place::HeightModel{(8.0 - b) / (S - 1 - hz), b};

  auto ground_row = [&](double height) {
    const double yb = (height - scene.height_model.b) / scene.height_model.a;
    return S - 1 - static_cast<int>(std::lround(yb));
  };
  const int n_distract = rng.uniform_int(0, options.max_distractors);
  for (int d = 0; d < n_distract; ++d) {
    const int kind = rng.uniform_int(0, 4);
    const double ref_h = rng.uniform(options.min_person, options.max_person);
    const int row = std::clamp(ground_row(ref_h), hz, S - 1);
    const double u = ref_h / 40.0;  // size unit at that depth
    const int cx = rng.uniform_int(0, S - 1);
    switch (kind) {
      case 0: {  // pole
        const int hgt = static_cast<int>(ref_h * rng.uniform(0.9, 1.6));
        fill_rect(img, &labels, cx, row - hgt, cx + std::max(1, static_cast<int>(u * 2)), row + 1,
                  jitter({0.25, 0.25, 0.28}, rng, 0.05));
        if (rng.bernoulli(0.5))
          fill_rect(img, &labels, cx - static_cast<int>(3 * u), row - hgt, cx + static_cast<int>(4 * u),
                    row - hgt + static_cast<int>(5 * u) + 1, hsv(rng.uniform(), 0.8, 0.8));
        break;
      }
      case 1: {  // tree
        const double th = ref_h * rng.uniform(1.0, 1.5);
        fill_rect(img, &labels, cx, row - static_cast<int>(0.5 * th), cx + std::max(1, static_cast<int>(2 * u)),
                  row + 1, {0.35, 0.25, 0.15});
        fill_ellipse(img, &labels, cx + u, row - 0.7 * th, 0.3 * th, 0.3 * th, jitter({0.2, 0.45, 0.18}, rng, 0.06));
        break;
      }
      case 2: {  // car
        const int cw = static_cast<int>(u * rng.uniform(26, 36)), ch = static_cast<int>(u * rng.uniform(11, 15));
        const Rgb body = hsv(rng.uniform(), rng.uniform(0.2, 0.9), rng.uniform(0.3, 0.9));
        fill_rect(img, &labels, cx - cw / 2, row - ch, cx + cw / 2, row - static_cast<int>(2 * u), body);
        fill_rect(img, &labels, cx - cw / 3, row - ch - static_cast<int>(5 * u), cx + cw / 3, row - ch + 1,
                  scale(body, 0.8));
        fill_ellipse(img, &labels, cx - cw / 3.0, row - 1.5 * u, 2.5 * u, 2.5 * u, {0.08, 0.08, 0.08});
        fill_ellipse(img, &labels, cx + cw / 3.0, row - 1.5 * u, 2.5 * u, 2.5 * u, {0.08, 0.08, 0.08});
        break;
      }
      default: {  // bins, hydrants, sign boards: upright person-sized confusers
        const double bh = ref_h * rng.uniform(0.35, 0.9), bw = bh * rng.uniform(0.25, 0.5);
        const Rgb top = hsv(rng.uniform(), rng.uniform(0.3, 0.9), rng.uniform(0.3, 0.9));
        const Rgb bottom = rng.bernoulli(0.5) ? top : hsv(rng.uniform(), rng.uniform(0.2, 0.7), rng.uniform(0.1, 0.5));
        fill_ellipse(img, &labels, cx, row - 0.7 * bh, bw / 2, 0.32 * bh, top);
        fill_rect(img, &labels, static_cast<int>(cx - bw / 2), static_cast<int>(row - 0.5 * bh),
                  static_cast<int>(cx + bw / 2) + 1, row + 1, bottom);
        break;
      }
    }
  }
  for (double& v : img.vec()) v = std::clamp(v * light + rng.normal(0.0, 0.02), 0.0, 1.0);
  scene.background = img;
  return scene;
}

bool add_random_person(Scene& scene, Rng& rng, const SceneOptions& options) {
  const int S = scene.context.width();
  const auto& hm = scene.height_model;
  for (int attempt = 0; attempt < 30; ++attempt) {
    const double target = rng.uniform(options.min_person, options.max_person);
    const int yb = static_cast<int>(std::lround((target - hm.b) / hm.a));
    if (yb < 0 || yb >= S) continue;
    const double height = hm(yb);
    const int row = S - 1 - yb;
    const int x = rng.uniform_int(static_cast<int>(0.25 * height), S - 1 - static_cast<int>(0.25 * height));
    if (!place::walkable(scene.context.labels[static_cast<std::size_t>(row) * S + x])) continue;
    const BodyPose body = random_body_pose(rng);
    PersonInstance p;
    p.skeleton = make_skeleton(body, x, row + 0.5, height, S, S, rng);
    if (!filter_sample(p.skeleton)) continue;
    p.appearance = random_appearance(rng);
    const auto shape = body_shape(p.skeleton);
    if (shape.empty()) continue;
    Tensor canvas = scene.context.image;
    p.mask = draw_person(canvas, shape, p.appearance, rng);
    int r0 = S, r1 = -1, c0 = S, c1 = -1;
    for (int yy = 0; yy < S; ++yy)
      for (int xx = 0; xx < S; ++xx)
        if (p.mask(0, 0, yy, xx) > 0.5) {
          r0 = std::min(r0, yy), r1 = std::max(r1, yy), c0 = std::min(c0, xx), c1 = std::max(c1, xx);
        }
    if (r1 < 0) continue;
    p.box = place::PersonBox{0.5 * (c0 + c1 + 1), static_cast<double>(S - 1 - r1), static_cast<double>(r1 - r0 + 1),
                             static_cast<double>(c1 - c0 + 1)};
    bool grounded = false;
    for (int c = c0; c <= c1; ++c)
      grounded = grounded || (p.mask(0, 0, r1, c) > 0.5 &&
                              place::walkable(scene.context.labels[static_cast<std::size_t>(r1) * S + c]));
    if (!grounded) continue;
    scene.context.image = std::move(canvas);
    p.shape = shape;
    scene.context.persons.push_back(p.box);
    scene.people.push_back(std::move(p));
    return true;
  }
  return false;
}

CropWindow crop_window(const place::PersonBox& box, int image_height, double fill) {
  const double side = box.height / fill;
  const double bottom = image_height - box.y_bottom;
  return CropWindow{box.x - 0.5 * side, bottom - 0.5 * box.height - 0.5 * side, side};
}

Tensor crop_resize(const Tensor& image, const CropWindow& w, int s) {
  Tensor out(image.n(), image.c(), s, s);
  const double step = w.side / s;
  for (int j = 0; j < s; ++j) {
    const double sy = std::clamp(w.y0 + (j + 0.5) * step - 0.5, 0.0, image.h() - 1.0);
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, image.h() - 1);
    const double fy = sy - y0;
    for (int i = 0; i < s; ++i) {
      const double sx = std::clamp(w.x0 + (i + 0.5) * step - 0.5, 0.0, image.w() - 1.0);
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, image.w() - 1);
      const double fx = sx - x0;
      for (int n = 0; n < image.n(); ++n)
        for (int c = 0; c < image.c(); ++c)
          out(n, c, j, i) = (1 - fy) * ((1 - fx) * image(n, c, y0, x0) + fx * image(n, c, y0, x1)) +
                            fy * ((1 - fx) * image(n, c, y1, x0) + fx * image(n, c, y1, x1));
    }
  }
  return out;
}

Skeleton skeleton_to_crop(const Skeleton& s, const CropWindow& w, int size) {
  Skeleton out;
  out.height = out.width = size;
  const double k = size / w.side;
  for (int i = 0; i < kNumKeypoints; ++i) {
    if (!s.visible[i]) continue;
    out.x[i] = (s.x[i] - w.x0 + 0.5) * k - 0.5;
    out.y[i] = (s.y[i] - w.y0 + 0.5) * k - 0.5;
    out.visible[i] = out.x[i] >= 0 && out.x[i] < size && out.y[i] >= 0 && out.y[i] < size;
    if (!out.visible[i]) out.x[i] = out.y[i] = 0.0;
  }
  return out;
}

PersonCrop random_person_crop(Rng& rng, int size) {
  SceneOptions opts;
  opts.min_person = 30.0;
  opts.max_person = 46.0;
  for (;;) {
    Scene scene = random_background(rng, opts);
    if (!add_random_person(scene, rng, opts)) continue;
    const PersonInstance& p = scene.people.front();
    const CropWindow w = crop_window(p.box, scene.context.height());
    PersonCrop crop;
    crop.image = crop_resize(scene.context.image, w, size);
    crop.background = crop_resize(scene.background, w, size);
    crop.skeleton = skeleton_to_crop(p.skeleton, w, size);
    if (!filter_sample(crop.skeleton)) continue;
    const double k = size / w.side;
    std::vector<Ellipse> shape = p.shape;
    for (Ellipse& e : shape) {
      e.cx = (e.cx - w.x0 + 0.5) * k - 0.5;
      e.cy = (e.cy - w.y0 + 0.5) * k - 0.5;
      e.a *= k;
      e.b *= k;
    }
    crop.mask = render_mask(shape, size, size);
    crop.appearance = p.appearance;
    crop.window = w;
    crop.scene_size = scene.context.width();
    return crop;
  }
}

}  // namespace dummynet::synth
