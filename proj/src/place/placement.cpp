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

#include "dummynet/place/placement.hpp"

#include <algorithm>
#include <cmath>

#include "dummynet/core/error.hpp"
#include "dummynet/nn/functional.hpp"
#include "dummynet/simd/kernels.hpp"

namespace dummynet::place {

double intersection(const Box& a, const Box& b) {
  const double w = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double h = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  return (w > 0 && h > 0) ? w * h : 0.0;
}

double iou(const Box& a, const Box& b) {
  const double inter = intersection(a, b);
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0 ? inter / uni : 0.0;
}

Label SceneContext::label_at(int x, int y_bottom) const {
  const int row = height() - 1 - y_bottom;
  return labels[static_cast<std::size_t>(row) * width() + x];
}

void SceneContext::validate() const {
  if (image.n() != 1 || image.c() != 3) throw Error(ErrorCode::ShapeMismatch, "scene must be one RGB image");
  if (labels.size() != image.shape().plane_size())
    throw Error(ErrorCode::ShapeMismatch, "label map size differs from the image");
  for (const auto& p : persons) {
    const Box b = to_image_box(p, height());
    if (b.x < 0 || b.y < 0 || b.x + b.w > width() || b.y + b.h > height())
      throw Error(ErrorCode::OutOfBounds, "person box outside the scene");
  }
}

Box to_image_box(const PersonBox& p, int image_height) {
  const double bottom = image_height - p.y_bottom;  // edge below the footprint row
  return Box{p.x - 0.5 * p.width, bottom - p.height, p.width, p.height};
}

HeightModel fit_height_model(const std::vector<std::pair<double, double>>& samples) {
  const double n = static_cast<double>(samples.size());
  if (samples.size() < 2) throw Error(ErrorCode::DegenerateFit, "need at least two samples");
  double my = 0, mh = 0;
  for (const auto& [y, h] : samples) {
    my += y;
    mh += h;
  }
  my /= n;
  mh /= n;
  double syy = 0, syh = 0;
  for (const auto& [y, h] : samples) {
    syy += (y - my) * (y - my);
    syh += (y - my) * (h - mh);
  }
  if (!(syy > 0)) throw Error(ErrorCode::DegenerateFit, "all samples share one y value");
  HeightModel m;
  m.a = syh / syy;
  m.b = mh - m.a * my;
  return m;
}

bool is_valid_placement(const SceneContext& scene, const HeightModel& model, int x, int y_bottom,
                        const PlacementOptions& options) {
  const int H = scene.height(), W = scene.width();
  if (x < 0 || x >= W || y_bottom < 0 || y_bottom >= H) return false;
  if (!walkable(scene.label_at(x, y_bottom))) return false;
  const double h = model(y_bottom);
  if (!(h >= options.min_height)) return false;
  const PersonBox p{static_cast<double>(x), static_cast<double>(y_bottom), h, options.aspect * h};
  const Box box = to_image_box(p, H);
  if (box.x < 0 || box.y < 0 || box.x + box.w > W) return false;
  for (const auto& other : scene.persons) {
    if (!(other.height > options.protect_height)) continue;
    const Box ob = to_image_box(other, H);
    if (options.max_iou <= 0.0 ? intersection(box, ob) > 0.0 : iou(box, ob) > options.max_iou) return false;
  }
  return true;
}

Placement propose_placement(const SceneContext& scene, const HeightModel& model, Rng& rng,
                            const PlacementOptions& options) {
  std::vector<const PersonBox*> anchors;
  for (const auto& p : scene.persons)
    if (p.height >= options.anchor_height) anchors.push_back(&p);

  if (!anchors.empty()) {
    for (int attempt = 0; attempt < options.attempts; ++attempt) {
      const PersonBox& a = *anchors[rng.uniform_int(0, static_cast<int>(anchors.size()) - 1)];
      const double r = options.neighborhood * a.height;
      const int x = static_cast<int>(std::lround(a.x + rng.uniform(-r, r)));
      const int y = static_cast<int>(std::lround(a.y_bottom));
      if (is_valid_placement(scene, model, x, y, options))
        return Placement{x, y, model(y), true};
    }
  }
  std::vector<std::pair<int, int>> valid;
  for (int y = 0; y < scene.height(); ++y)
    for (int x = 0; x < scene.width(); ++x)
      if (is_valid_placement(scene, model, x, y, options)) valid.emplace_back(x, y);
  if (valid.empty()) throw Error(ErrorCode::NoValidPlacement, "no valid footprint in the scene");
  const auto [x, y] = valid[rng.uniform_int(0, static_cast<int>(valid.size()) - 1)];
  return Placement{x, y, model(y), false};
}

Insertion insert_person(const SceneContext& scene, const Tensor& patch, const Tensor& patch_mask,
                        const Placement& placement) {
  if (patch_mask.c() != 1 || patch_mask.h() != patch.h() || patch_mask.w() != patch.w())
    throw Error(ErrorCode::ShapeMismatch, "patch mask " + patch_mask.shape().str() + " vs patch " + patch.shape().str());
  const int ph = patch.h(), pw = patch.w();
  int r0 = ph, r1 = -1, c0 = pw, c1 = -1;
  for (int y = 0; y < ph; ++y)
    for (int x = 0; x < pw; ++x)
      if (patch_mask(0, 0, y, x) > 0.5) {
        r0 = std::min(r0, y);
        r1 = std::max(r1, y);
        c0 = std::min(c0, x);
        c1 = std::max(c1, x);
      }
  if (r1 < 0) throw Error(ErrorCode::EmptyMask, "patch mask has no pixel above 0.5");

  const double scale = placement.height / static_cast<double>(r1 - r0 + 1);
  const int sh = std::max(1, static_cast<int>(std::lround(ph * scale)));
  const int sw = std::max(1, static_cast<int>(std::lround(pw * scale)));
  const Tensor sp = nn::resize_bilinear(patch, sh, sw);
  const Tensor sm = nn::resize_bilinear(patch_mask, sh, sw);

  // Extent of the rescaled mask decides the anchor.
  int sr1 = -1, sc0 = sw, sc1 = -1, sr0 = sh;
  for (int y = 0; y < sh; ++y)
    for (int x = 0; x < sw; ++x)
      if (sm(0, 0, y, x) > 0.5) {
        sr0 = std::min(sr0, y);
        sr1 = std::max(sr1, y);
        sc0 = std::min(sc0, x);
        sc1 = std::max(sc1, x);
      }
  if (sr1 < 0) throw Error(ErrorCode::EmptyMask, "mask vanished after rescaling");

  const int H = scene.height(), W = scene.width();
  const int foot_row = H - 1 - placement.y_bottom;
  const int oy = foot_row - sr1;
  const int ox = placement.x - (sc0 + sc1) / 2;
  if (oy + sr0 < 0 || ox + sc0 < 0 || ox + sc1 >= W || oy + sr1 >= H)
    throw Error(ErrorCode::OutOfBounds, "scaled person leaves the image");

  Insertion out;
  out.image = scene.image;
  out.alpha = Tensor(1, 1, H, W);
  // Composite only the window the patch covers; everything else stays untouched.
  const int y0 = std::max(0, oy), y1 = std::min(H, oy + sh);
  const int x0 = std::max(0, ox), x1 = std::min(W, ox + sw);
  const int ww = x1 - x0;
  std::vector<double> m(ww), fg(ww);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      m[x - x0] = std::clamp(sm(0, 0, y - oy, x - ox), 0.0, 1.0);
      out.alpha(0, 0, y, x) = m[x - x0];
    }
    for (int c = 0; c < 3; ++c) {
      for (int x = x0; x < x1; ++x) fg[x - x0] = sp(0, c, y - oy, x - ox);
      double* row = &out.image(0, c, y, x0);
      simd::blend(m.data(), fg.data(), row, row, ww);
    }
  }
  out.box = Box{static_cast<double>(ox + sc0), static_cast<double>(oy + sr0), static_cast<double>(sc1 - sc0 + 1),
                static_cast<double>(sr1 - sr0 + 1)};
  return out;
}

}  // namespace dummynet::place
