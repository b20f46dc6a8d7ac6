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

#include "dummynet/eval/detector.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "dummynet/core/image.hpp"
#include "dummynet/synth/world.hpp"

namespace dummynet::eval {

std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold) {
  std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) { return a.score > b.score; });
  std::map<std::string, std::vector<place::Box>> kept_boxes;
  std::vector<Detection> out;
  for (const Detection& d : dets) {
    auto& kept = kept_boxes[d.image_id];
    const bool suppressed =
        std::any_of(kept.begin(), kept.end(), [&](const place::Box& b) { return place::iou(b, d.box) > iou_threshold; });
    if (suppressed) continue;
    kept.push_back(d.box);
    out.push_back(d);
  }
  return out;
}

std::vector<Detection> detect_people(const Classifier& model, const Tensor& image, const place::HeightModel& heights,
                                     const std::string& image_id, const DetectorOptions& o) {
  const int H = image.h();
  const int W = image.w();
  std::vector<Detection> raw;
  std::vector<Tensor> windows;
  for (int yb = 0; yb < H; yb += o.row_step) {
    const double h = heights(yb);
    if (h < o.min_height) continue;
    for (int x = 0; x < W; x += o.stride) {
      const place::PersonBox p{static_cast<double>(x), static_cast<double>(yb), h, o.aspect * h};
      const place::Box box = place::to_image_box(p, H);
      if (box.y < 0) continue;
      windows.push_back(synth::crop_resize(image, synth::crop_window(p, H, o.fill), o.window));
      raw.push_back({image_id, box, 0.0});
    }
  }
  const std::vector<double> scores = score_images(model, windows);
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i].score = scores[i];
  return nms(std::move(raw), o.nms_iou);
}

void write_mr_fppi_plot(const std::filesystem::path& path, const std::vector<std::vector<FppiPoint>>& curves) {
  constexpr int kW = 360, kH = 270, kL = 30, kR = 10, kT = 10, kB = 30;
  static const std::array<std::array<double, 3>, 6> palette = {
      {{0.1, 0.3, 0.9}, {0.9, 0.15, 0.1}, {0.1, 0.6, 0.2}, {0.95, 0.55, 0.0}, {0.5, 0.2, 0.7}, {0.4, 0.4, 0.4}}};
  Tensor img(1, 3, kH, kW, 1.0);
  auto px = [&](double fppi) { return kL + (std::log10(std::max(fppi, 1e-2)) + 2.0) / 3.0 * (kW - kL - kR); };
  auto py = [&](double mr) { return kT + (0.0 - std::log10(std::clamp(mr, 1e-2, 1.0))) / 2.0 * (kH - kT - kB); };
  auto dot = [&](int x, int y, const std::array<double, 3>& c) {
    if (x < 0 || y < 0 || x >= kW || y >= kH) return;
    for (int ch = 0; ch < 3; ++ch) img(0, ch, y, x) = c[ch];
  };
  auto line = [&](double x0, double y0, double x1, double y1, const std::array<double, 3>& c) {
    const int n = static_cast<int>(std::max(std::abs(x1 - x0), std::abs(y1 - y0))) + 1;
    for (int i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      dot(static_cast<int>(std::lround(x0 + t * (x1 - x0))), static_cast<int>(std::lround(y0 + t * (y1 - y0))), c);
    }
  };
  const std::array<double, 3> grid{0.85, 0.85, 0.85}, axis{0.0, 0.0, 0.0};
  for (int d = -2; d <= 1; ++d) line(px(std::pow(10.0, d)), kT, px(std::pow(10.0, d)), kH - kB, grid);
  for (int d = -2; d <= 0; ++d) line(kL, py(std::pow(10.0, d)), kW - kR, py(std::pow(10.0, d)), grid);
  line(kL, kT, kL, kH - kB, axis);
  line(kL, kH - kB, kW - kR, kH - kB, axis);
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& col = palette[c % palette.size()];
    const auto& pts = curves[c];
    for (std::size_t i = 1; i < pts.size(); ++i) {
      // Staircase: fppi grows first, then the miss rate drops.
      const double x0 = px(pts[i - 1].fppi), x1 = px(pts[i].fppi);
      const double y0 = py(pts[i - 1].miss_rate), y1 = py(pts[i].miss_rate);
      line(x0, y0, x1, y0, col);
      line(x1, y0, x1, y1, col);
    }
  }
  write_png(path, img);
}

}  // namespace dummynet::eval
