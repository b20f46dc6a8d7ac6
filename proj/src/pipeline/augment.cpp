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

#include "dummynet/pipeline/augment.hpp"

#include <algorithm>
#include <cmath>

#include "dummynet/compose/compositor.hpp"
#include "dummynet/core/error.hpp"
#include "dummynet/core/parallel.hpp"
#include "dummynet/nn/functional.hpp"

namespace dummynet::pipeline {

namespace {

const std::vector<std::pair<Mode, std::string_view>>& names() {
  static const std::vector<std::pair<Mode, std::string_view>> n = {
      {Mode::full, "full"},
      {Mode::fixed_pose, "fixed-pose"},
      {Mode::hull_mask, "hull-mask"},
      {Mode::gaussian_appearance, "gaussian-appearance"},
      {Mode::fixed_appearance, "fixed-appearance"},
      {Mode::fixed_background, "fixed-background"},
  };
  return n;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Largest cluster's mean pose: the single pose of the fixed-pose ablation.
pose::NormalizedSkeleton fixed_pose(const pose::PoseModel& pm) {
  if (pm.clusters.empty()) throw Error(ErrorCode::NoSamples, "pose model has no clusters");
  const auto it = std::max_element(pm.clusters.begin(), pm.clusters.end(),
                                   [](const auto& a, const auto& b) { return a.member_count < b.member_count; });
  return pose::mean_skeleton(*it);
}

}  // namespace

std::string_view mode_name(Mode m) {
  for (const auto& [mode, name] : names())
    if (mode == m) return name;
  return "full";
}

Mode parse_mode(std::string_view name) {
  for (const auto& [mode, n] : names())
    if (n == name) return mode;
  throw Error(ErrorCode::ConfigError, "unknown mode '" + std::string(name) + "'");
}

const std::vector<Mode>& ablation_modes() {
  static const std::vector<Mode> m = {Mode::fixed_pose, Mode::hull_mask, Mode::gaussian_appearance,
                                      Mode::fixed_appearance, Mode::fixed_background};
  return m;
}

CanvasPlacement fit_canvas_placement(const std::vector<pose::Skeleton>& skeletons) {
  std::vector<double> t, cx, cy;
  for (const auto& s : skeletons) {
    if (!pose::filter_sample(s)) continue;
    const pose::TorsoFrame f = pose::torso_frame(s);
    if (f.height <= 0) continue;
    t.push_back(f.height);
    cx.push_back(f.cx);
    cy.push_back(f.cy);
  }
  if (t.empty()) throw Error(ErrorCode::NoSamples, "no usable skeletons for canvas placement");
  return CanvasPlacement{median(t), median(cx), median(cy)};
}

pose::Skeleton to_canvas(const pose::NormalizedSkeleton& ns, const CanvasPlacement& p, int size) {
  pose::Skeleton s;
  s.height = s.width = size;
  for (int k = 0; k < pose::kNumKeypoints; ++k) {
    s.x[k] = p.cx + p.torso_height * ns.kx(k);
    s.y[k] = p.cy + p.torso_height * ns.ky(k);
    s.visible[k] = ns.visible[k] && s.x[k] >= 0 && s.x[k] < size && s.y[k] >= 0 && s.y[k] < size;
    if (!s.visible[k]) s.x[k] = s.y[k] = 0.0;
  }
  return s;
}

std::vector<AppearanceSource> filter_by_brightness(const std::vector<AppearanceSource>& sources, double t) {
  if (t <= 0) return sources;
  std::vector<AppearanceSource> out;
  for (const auto& s : sources)
    if (mean(s.image) <= t) out.push_back(s);
  return out;
}

Tensor donor_code(const Models& m, const AppearanceSource& src, Rng& rng) {
  const Tensor mask = mask::estimate_mask(*m.mask, pose::render_heatmaps(src.skeleton, m.sigma));
  Tensor img = src.image;
  if (img.h() != appearance::kImageSize) img = nn::resize_bilinear(img, appearance::kImageSize, appearance::kImageSize);
  Tensor msk = mask;
  if (msk.h() != appearance::kImageSize) msk = nn::resize_bilinear(msk, appearance::kImageSize, appearance::kImageSize);
  auto [mu, log_var] = m.vae->encode(appearance::mask_background(img, msk), nullptr);
  return appearance::reparametrize(mu, log_var, rng);
}

std::vector<GeneratedPerson> generate_people(const Models& m, const std::vector<Tensor>& backgrounds,
                                             const std::vector<AppearanceSource>& sources, int count, Mode mode,
                                             std::uint64_t seed, int workers) {
  if (!m.poses || !m.mask || !m.vae || !m.generator) throw Error(ErrorCode::MissingArtifact, "models not loaded");
  if (backgrounds.empty()) throw Error(ErrorCode::NoSamples, "no backgrounds");
  const bool needs_donor = mode != Mode::gaussian_appearance;
  if (needs_donor && sources.empty()) throw Error(ErrorCode::NoSamples, "no appearance sources");
  const int s = m.generator->config().output_size();

  const pose::NormalizedSkeleton single_pose = fixed_pose(*m.poses);
  Tensor single_code;
  int single_donor = -1;
  if (mode == Mode::fixed_appearance) {
    Rng r(seed, "fixed-appearance");
    single_donor = r.uniform_int(0, static_cast<int>(sources.size()) - 1);
    single_code = donor_code(m, sources[single_donor], r);
  }
  Tensor single_background;
  if (mode == Mode::fixed_background) {
    Rng r(seed, "fixed-background");
    single_background = backgrounds[r.uniform_int(0, static_cast<int>(backgrounds.size()) - 1)];
  }

  std::vector<GeneratedPerson> out(std::max(count, 0));
  parallel_for(count, workers, [&](int i) {
    Rng rng(seed, "person", i);
    GeneratedPerson& g = out[i];
    // Pose: resample until the canvas keeps enough keypoints.
    for (int attempt = 0;; ++attempt) {
      pose::NormalizedSkeleton ns = single_pose;
      if (mode != Mode::fixed_pose) ns = pose::sample_skeleton(m.poses->clusters[m.poses->pick_cluster(rng)], rng);
      g.skeleton = to_canvas(ns, m.placement, s);
      if (pose::filter_sample(g.skeleton) || mode == Mode::fixed_pose || attempt > 50) break;
    }
    const Tensor heat = pose::render_heatmaps(g.skeleton, m.sigma);
    if (mode == Mode::hull_mask) {
      try {
        g.mask = mask::convex_hull_mask(g.skeleton, s, s);
      } catch (const Error&) {
        g.mask = mask::estimate_mask(*m.mask, heat);
      }
    } else {
      g.mask = mask::estimate_mask(*m.mask, heat);
    }

    Tensor z;
    if (mode == Mode::gaussian_appearance) {
      z = Tensor(1, gan::kLatentDim, 1, 1);
      for (double& v : z.vec()) v = rng.normal();
    } else if (mode == Mode::fixed_appearance) {
      z = single_code;
      g.donor = single_donor;
    } else {
      g.donor = rng.uniform_int(0, static_cast<int>(sources.size()) - 1);
      z = donor_code(m, sources[g.donor], rng);
    }

    const Tensor& target = backgrounds[static_cast<std::size_t>(i) % backgrounds.size()];
    const Tensor& synth_bg = mode == Mode::fixed_background ? single_background : target;
    const gan::Synthesis syn = gan::synthesize(*m.generator, z, synth_bg, g.mask, heat);
    g.person = syn.person;
    // Fixed background: the person is cut from the shared background's
    // synthesis and pasted into the target.
    g.composite = mode == Mode::fixed_background ? compose::composite(g.mask, syn.person, target) : syn.composite;
  });
  return out;
}

SceneAugmentation augment_scene(const Models& m, const place::SceneContext& scene, const place::HeightModel& heights,
                                const std::vector<AppearanceSource>& sources, Mode mode, std::uint64_t seed) {
  const int s = m.generator->config().output_size();
  // A wide generated mask can still leave the image; retry a few footprints.
  for (int attempt = 0;; ++attempt) {
    const std::uint64_t sub = derive_seed(seed, "attempt", attempt);
    Rng rng(sub, "placement");
    SceneAugmentation a;
    a.placement = place::propose_placement(scene, heights, rng);
    const place::PersonBox box{static_cast<double>(a.placement.x), static_cast<double>(a.placement.y_bottom),
                               a.placement.height, 0.41 * a.placement.height};
    const Tensor bg = synth::crop_resize(scene.image, synth::crop_window(box, scene.height()), s);
    a.person = generate_people(m, {bg}, sources, 1, mode, sub).front();
    try {
      a.insertion = place::insert_person(scene, a.person.person, a.person.mask, a.placement);
      return a;
    } catch (const Error& e) {
      if (attempt >= 9 || (e.code() != ErrorCode::OutOfBounds && e.code() != ErrorCode::EmptyMask)) throw;
    }
  }
}

}  // namespace dummynet::pipeline
