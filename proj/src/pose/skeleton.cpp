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

#include "dummynet/pose/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "dummynet/core/error.hpp"

namespace dummynet::pose {

namespace {

constexpr std::array<std::string_view, kNumKeypoints> kNames = {
    "nose",          "left_eye",       "right_eye",  "left_ear",    "right_ear",
    "left_shoulder", "right_shoulder", "left_elbow", "right_elbow", "left_wrist",
    "right_wrist",   "left_hip",       "right_hip",  "left_knee",   "right_knee",
    "left_ankle",    "right_ankle"};

// Mean of the visible members of a left/right pair.
bool pair_center(const Skeleton& s, int left, int right, double& cx, double& cy) {
  const bool l = s.visible[left];
  const bool r = s.visible[right];
  if (l && r) {
    cx = 0.5 * (s.x[left] + s.x[right]);
    cy = 0.5 * (s.y[left] + s.y[right]);
  } else if (l) {
    cx = s.x[left];
    cy = s.y[left];
  } else if (r) {
    cx = s.x[right];
    cy = s.y[right];
  } else {
    return false;
  }
  return true;
}

}  // namespace

std::string_view keypoint_name(int k) { return kNames.at(static_cast<std::size_t>(k)); }

const std::vector<std::array<int, 2>>& limbs() {
  static const std::vector<std::array<int, 2>> kLimbs = {
      {kLeftAnkle, kLeftKnee},       {kLeftKnee, kLeftHip},          {kRightAnkle, kRightKnee},
      {kRightKnee, kRightHip},       {kLeftHip, kRightHip},          {kLeftShoulder, kLeftHip},
      {kRightShoulder, kRightHip},   {kLeftShoulder, kRightShoulder}, {kLeftShoulder, kLeftElbow},
      {kRightShoulder, kRightElbow}, {kLeftElbow, kLeftWrist},       {kRightElbow, kRightWrist},
      {kLeftEye, kRightEye},         {kNose, kLeftEye},              {kNose, kRightEye},
      {kLeftEye, kLeftEar},          {kRightEye, kRightEar},         {kLeftEar, kLeftShoulder},
      {kRightEar, kRightShoulder}};
  return kLimbs;
}

int Skeleton::visible_count() const {
  return static_cast<int>(std::count(visible.begin(), visible.end(), true));
}

void Skeleton::validate() const {
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (!visible[k]) continue;
    if (!(x[k] >= 0.0 && x[k] < width && y[k] >= 0.0 && y[k] < height))
      throw Error(ErrorCode::OutOfBounds, std::string(keypoint_name(k)) + " outside the " +
                                              std::to_string(height) + "x" + std::to_string(width) + " canvas");
  }
}

bool filter_sample(const Skeleton& s) {
  const bool hip = s.visible[kLeftHip] || s.visible[kRightHip];
  const bool shoulder = s.visible[kLeftShoulder] || s.visible[kRightShoulder];
  return s.visible_count() >= 6 && hip && shoulder;
}

TorsoFrame torso_frame(const Skeleton& s) {
  double sx = 0, sy = 0, hx = 0, hy = 0;
  if (!pair_center(s, kLeftShoulder, kRightShoulder, sx, sy) || !pair_center(s, kLeftHip, kRightHip, hx, hy))
    throw Error(ErrorCode::DegeneratePose, "need a visible shoulder and a visible hip");
  TorsoFrame f;
  f.cx = 0.5 * (sx + hx);
  f.cy = 0.5 * (sy + hy);
  f.height = std::hypot(sx - hx, sy - hy);
  return f;
}

NormalizedSkeleton normalize_skeleton(const Skeleton& s) {
  const TorsoFrame f = torso_frame(s);
  if (!(f.height > 0.0)) throw Error(ErrorCode::DegeneratePose, "torso height is zero");
  NormalizedSkeleton ns;
  ns.visible = s.visible;
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (!s.visible[k]) continue;
    ns.coords[k] = (s.x[k] - f.cx) / f.height;
    ns.coords[kNumKeypoints + k] = (s.y[k] - f.cy) / f.height;
  }
  return ns;
}

Skeleton place_in_canvas(const NormalizedSkeleton& ns, int h, int w, double fill) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (!ns.visible[k]) continue;
    x0 = std::min(x0, ns.kx(k));
    x1 = std::max(x1, ns.kx(k));
    y0 = std::min(y0, ns.ky(k));
    y1 = std::max(y1, ns.ky(k));
  }
  Skeleton s;
  s.height = h;
  s.width = w;
  if (!(x1 >= x0)) return s;  // nothing visible
  const double bw = std::max(x1 - x0, 1e-9);
  const double bh = std::max(y1 - y0, 1e-9);
  const double scale = std::min(fill * h / bh, fill * w / bw);
  const double ox = 0.5 * (w - 1) - scale * 0.5 * (x0 + x1);
  const double oy = 0.5 * (h - 1) - scale * 0.5 * (y0 + y1);
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (!ns.visible[k]) continue;
    s.x[k] = std::clamp(ox + scale * ns.kx(k), 0.0, w - 1.0);
    s.y[k] = std::clamp(oy + scale * ns.ky(k), 0.0, h - 1.0);
    s.visible[k] = true;
  }
  return s;
}

Tensor render_heatmaps(const Skeleton& s, double sigma) {
  if (s.height <= 0 || s.width <= 0) throw Error(ErrorCode::ShapeMismatch, "heatmap canvas must be nonempty");
  Tensor out(1, kNumKeypoints, s.height, s.width);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  // Separable: exp(-(dx^2 + dy^2) / 2s^2) = gx * gy.
  std::vector<double> gx(s.width), gy(s.height);
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (!s.visible[k]) continue;
    for (int i = 0; i < s.width; ++i) gx[i] = std::exp(-(i - s.x[k]) * (i - s.x[k]) * inv);
    for (int j = 0; j < s.height; ++j) gy[j] = std::exp(-(j - s.y[k]) * (j - s.y[k]) * inv);
    double* p = out.plane(0, k);
    for (int j = 0; j < s.height; ++j)
      for (int i = 0; i < s.width; ++i) p[static_cast<std::size_t>(j) * s.width + i] = gy[j] * gx[i];
  }
  return out;
}

std::vector<PersonRecord> read_keypoints_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingArtifact, "cannot open keypoints file " + path.string());
  std::vector<PersonRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path.string() + ":" + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::FormatError, where + ": " + e.what());
    }
    if (!j.contains("keypoints") || !j["keypoints"].is_array() || j["keypoints"].size() != 3 * kNumKeypoints)
      throw Error(ErrorCode::FormatError, where + ": keypoints must hold 51 numbers");
    PersonRecord r;
    r.image_id = j.value("image_id", nlohmann::json()).is_string() ? j["image_id"].get<std::string>()
                                                                    : j.value("image_id", nlohmann::json()).dump();
    if (j.contains("bbox")) {
      if (!j["bbox"].is_array() || j["bbox"].size() != 4) throw Error(ErrorCode::FormatError, where + ": bad bbox");
      for (int i = 0; i < 4; ++i) r.bbox[i] = j["bbox"][i].get<double>();
    }
    Skeleton& s = r.skeleton;
    double maxx = 0, maxy = 0;
    for (int k = 0; k < kNumKeypoints; ++k) {
      s.x[k] = j["keypoints"][3 * k].get<double>();
      s.y[k] = j["keypoints"][3 * k + 1].get<double>();
      s.visible[k] = j["keypoints"][3 * k + 2].get<double>() > 0;
      if (s.visible[k]) {
        maxx = std::max(maxx, s.x[k]);
        maxy = std::max(maxy, s.y[k]);
      } else {
        s.x[k] = s.y[k] = 0.0;
      }
    }
    if (j.contains("image_size")) {
      s.height = j["image_size"].at(0).get<int>();
      s.width = j["image_size"].at(1).get<int>();
    } else {
      s.height = static_cast<int>(std::floor(std::max(maxy, r.bbox[1] + r.bbox[3]))) + 1;
      s.width = static_cast<int>(std::floor(std::max(maxx, r.bbox[0] + r.bbox[2]))) + 1;
    }
    try {
      s.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::FormatError, where + ": " + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_keypoints_jsonl(const std::filesystem::path& path, const std::vector<PersonRecord>& records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  for (const auto& r : records) {
    nlohmann::json kp = nlohmann::json::array();
    for (int k = 0; k < kNumKeypoints; ++k) {
      kp.push_back(r.skeleton.visible[k] ? r.skeleton.x[k] : 0.0);
      kp.push_back(r.skeleton.visible[k] ? r.skeleton.y[k] : 0.0);
      kp.push_back(r.skeleton.visible[k] ? 2 : 0);
    }
    nlohmann::json j = {{"image_id", r.image_id},
                        {"bbox", r.bbox},
                        {"keypoints", kp},
                        {"image_size", {r.skeleton.height, r.skeleton.width}}};
    out << j.dump() << '\n';
  }
}

}  // namespace dummynet::pose
