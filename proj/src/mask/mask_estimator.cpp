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

#include "dummynet/mask/mask_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "dummynet/core/archive.hpp"
#include "dummynet/core/error.hpp"
#include "dummynet/core/image.hpp"
#include "dummynet/nn/functional.hpp"
#include "dummynet/nn/optim.hpp"

namespace dummynet::mask {

namespace {

enum { kE1, kE2, kE3, kB, kD3, kD2, kD1, kHead };

Tensor cat(const Tensor& a, const Tensor& b) {
  const Tensor parts[2] = {a, b};
  return concat_channels(parts);
}

}  // namespace

MaskEstimator::MaskEstimator(int resolution, int base_width, std::uint64_t seed)
    : resolution_(resolution), width_(base_width) {
  if (resolution <= 0 || resolution % 8 != 0)
    throw Error(ErrorCode::ConfigError, "mask resolution must be a positive multiple of 8");
  if (base_width <= 0) throw Error(ErrorCode::ConfigError, "mask base width must be positive");
  Rng rng(seed);
  const int w = base_width;
  const int k = pose::kNumKeypoints;
  const int in[8] = {k, w, 2 * w, 4 * w, 8 * w + 4 * w, 4 * w + 2 * w, 2 * w + w, w};
  const int out[8] = {w, 2 * w, 4 * w, 8 * w, 4 * w, 2 * w, w, 1};
  for (int i = 0; i < 8; ++i) {
    const bool head = i == kHead;
    convs_.push_back(std::make_unique<nn::Conv2d>(in[i], out[i], head ? 1 : 3, 1, head ? 0 : 1, rng, true,
                                                  head ? 1.0 : std::sqrt(2.0)));
    convs_.back()->register_parameters(params_, "c" + std::to_string(i) + ".");
  }
}

Tensor MaskEstimator::forward_logits(const Tensor& x, nn::Tape* t) const {
  auto block = [&](int i, const Tensor& h) { return act_.forward(convs_[i]->forward(h, t), t); };
  const Tensor a1 = block(kE1, x);
  const Tensor a2 = block(kE2, pool_.forward(a1, t));
  const Tensor a3 = block(kE3, pool_.forward(a2, t));
  const Tensor b = block(kB, pool_.forward(a3, t));
  const Tensor d3 = block(kD3, cat(up_.forward(b, t), a3));
  const Tensor d2 = block(kD2, cat(up_.forward(d3, t), a2));
  const Tensor d1 = block(kD1, cat(up_.forward(d2, t), a1));
  return convs_[kHead]->forward(d1, t);
}

Tensor MaskEstimator::backward(const Tensor& dy, nn::Tape& t) {
  const int w = width_;
  auto block = [&](int i, const Tensor& g) { return convs_[i]->backward(act_.backward(g, t), t); };
  Tensor g = convs_[kHead]->backward(dy, t);
  g = block(kD1, g);
  const Tensor skip1 = slice_channels(g, 2 * w, w);
  g = block(kD2, up_.backward(slice_channels(g, 0, 2 * w), t));
  const Tensor skip2 = slice_channels(g, 4 * w, 2 * w);
  g = block(kD3, up_.backward(slice_channels(g, 0, 4 * w), t));
  const Tensor skip3 = slice_channels(g, 8 * w, 4 * w);
  g = block(kB, up_.backward(slice_channels(g, 0, 8 * w), t));
  g = pool_.backward(g, t);
  add_inplace(g, skip3);
  g = block(kE3, g);
  g = pool_.backward(g, t);
  add_inplace(g, skip2);
  g = block(kE2, g);
  g = pool_.backward(g, t);
  add_inplace(g, skip1);
  return block(kE1, g);
}

void MaskEstimator::save(const std::filesystem::path& path) const {
  Archive ar(kMaskModelTag);
  ar.meta()["resolution"] = resolution_;
  ar.meta()["base_width"] = width_;
  params_.save_to(ar);
  ar.save(path);
}

MaskEstimator MaskEstimator::load(const std::filesystem::path& path) {
  const Archive ar = Archive::load(path, kMaskModelTag);
  MaskEstimator m(ar.meta().at("resolution").get<int>(), ar.meta().at("base_width").get<int>(), 0);
  m.params_.load_from(ar);
  return m;
}

Tensor estimate_mask(const MaskEstimator& model, const Tensor& heatmaps) {
  const int r = model.resolution();
  if (heatmaps.c() != pose::kNumKeypoints || heatmaps.h() != r || heatmaps.w() != r)
    throw Error(ErrorCode::ResolutionMismatch,
                "mask estimator expects (n, 17, " + std::to_string(r) + ", " + std::to_string(r) + "), got " +
                    heatmaps.shape().str());
  return nn::sigmoid(model.forward_logits(heatmaps, nullptr));
}

Tensor estimate_mask(const MaskEstimator& model, const pose::Skeleton& skeleton, double sigma) {
  if (skeleton.height != model.resolution() || skeleton.width != model.resolution())
    throw Error(ErrorCode::ResolutionMismatch, "skeleton canvas differs from the mask resolution");
  return estimate_mask(model, pose::render_heatmaps(skeleton, sigma));
}

namespace {

void stack(const std::vector<MaskSample>& data, const std::vector<std::size_t>& idx, std::size_t begin,
           std::size_t end, Tensor& x, Tensor& y) {
  std::vector<Tensor> xs, ys;
  for (std::size_t i = begin; i < end; ++i) {
    xs.push_back(data[idx[i]].heatmaps);
    ys.push_back(data[idx[i]].mask);
  }
  x = concat_batch(xs);
  y = concat_batch(ys);
}

}  // namespace

double mean_bce(const MaskEstimator& model, const std::vector<MaskSample>& data) {
  if (data.empty()) return 0.0;
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  double total = 0.0;
  for (std::size_t b = 0; b < data.size(); b += 16) {
    const std::size_t e = std::min(data.size(), b + 16);
    Tensor x, y;
    stack(data, idx, b, e, x, y);
    total += nn::bce_with_logits(model.forward_logits(x, nullptr), y, nullptr) * static_cast<double>(e - b);
  }
  return total / static_cast<double>(data.size());
}

MaskTrainResult train_mask_estimator(MaskEstimator& model, const std::vector<MaskSample>& train,
                                     const std::vector<MaskSample>& val, const MaskTrainConfig& config) {
  if (train.empty()) throw Error(ErrorCode::EmptyDataset, "mask estimator training set is empty");
  for (const auto& s : train)
    if (s.heatmaps.h() != model.resolution() || s.mask.shape() != Shape{1, 1, model.resolution(), model.resolution()})
      throw Error(ErrorCode::ResolutionMismatch, "training pair does not match the model resolution");
  auto& params = model.parameters();
  nn::Adam opt(params, nn::AdamOptions{config.lr});
  Rng rng(config.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  MaskTrainResult result;
  Archive best("best");
  double best_loss = INFINITY;
  const std::size_t batch = static_cast<std::size_t>(std::max(1, config.batch));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng.engine());
    double total = 0.0;
    for (std::size_t b = 0; b < order.size(); b += batch) {
      const std::size_t e = std::min(order.size(), b + batch);
      Tensor x, y, grad;
      stack(train, order, b, e, x, y);
      nn::Tape tape;
      const Tensor logits = model.forward_logits(x, &tape);
      const double loss = nn::bce_with_logits(logits, y, &grad);
      if (!std::isfinite(loss)) throw Error(ErrorCode::NonFiniteLoss, "mask BCE is not finite");
      params.zero_grad();
      model.backward(grad, tape);
      if (!params.grads_finite()) throw Error(ErrorCode::NonFiniteGradient, "mask estimator gradient");
      opt.step();
      total += loss * static_cast<double>(e - b);
    }
    result.train_loss.push_back(total / static_cast<double>(train.size()));
    const double v = val.empty() ? mean_bce(model, train) : mean_bce(model, val);
    result.val_loss.push_back(v);
    if (v < best_loss) {
      best_loss = v;
      result.best_epoch = epoch;
      params.save_to(best);
    }
    result.best_loss.push_back(best_loss);
    if (config.verbose)
      std::fprintf(stderr, "mask epoch %d train %.4f val %.4f\n", epoch, result.train_loss.back(), v);
  }
  if (result.best_epoch >= 0) params.load_from(best);
  return result;
}

double mask_iou(const Tensor& pred, const Tensor& target, double threshold) {
  if (pred.size() != target.size()) throw Error(ErrorCode::ShapeMismatch, "mask_iou shapes differ");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool a = pred[i] > threshold, b = target[i] > threshold;
    inter += (a && b) ? 1 : 0;
    uni += (a || b) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

using P = std::array<double, 2>;

double cross(const P& o, const P& a, const P& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

}  // namespace

std::vector<P> convex_hull(std::vector<P> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<P> hull(2 * pts.size());
  std::size_t k = 0;
  for (const P& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double polygon_area(const std::vector<P>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const P& p = poly[i];
    const P& q = poly[(i + 1) % poly.size()];
    a += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * std::abs(a);
}

Tensor convex_hull_mask(const pose::Skeleton& s, int h, int w) {
  std::vector<P> pts;
  for (int k = 0; k < pose::kNumKeypoints; ++k)
    if (s.visible[k]) pts.push_back({s.x[k], s.y[k]});
  if (pts.size() < 3)
    throw Error(ErrorCode::DegenerateHull, std::to_string(pts.size()) + " visible keypoints, need 3");
  const std::vector<P> hull = convex_hull(pts);
  if (hull.size() < 3) throw Error(ErrorCode::DegenerateHull, "visible keypoints are collinear");
  // Scale-aware tolerance so keypoints on the boundary count as inside.
  double extent = 0.0;
  for (const P& p : hull) extent = std::max({extent, std::abs(p[0]), std::abs(p[1])});
  const double eps = 1e-9 * std::max(1.0, extent * extent);
  Tensor m(1, 1, h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const P c{static_cast<double>(x), static_cast<double>(y)};
      bool inside = true;
      for (std::size_t i = 0; i < hull.size() && inside; ++i)
        inside = cross(hull[i], hull[(i + 1) % hull.size()], c) >= -eps;
      if (inside) m(0, 0, y, x) = 1.0;
    }
  // A hull vertex off the pixel grid may round to a pixel whose center is outside.
  for (const P& p : pts) {
    const long x = std::lround(p[0]), y = std::lround(p[1]);
    if (x >= 0 && y >= 0 && x < w && y < h) m(0, 0, static_cast<int>(y), static_cast<int>(x)) = 1.0;
  }
  return m;
}

void write_mask_png(const std::filesystem::path& path, const Tensor& mask) {
  if (mask.n() != 1 || mask.c() != 1) throw Error(ErrorCode::ShapeMismatch, "mask PNG needs (1, 1, H, W)");
  write_png(path, mask);
}

Tensor read_mask_png(const std::filesystem::path& path) {
  Tensor t = read_png(path);
  if (t.c() != 1) throw Error(ErrorCode::FormatError, path.string() + " is not a grayscale mask");
  return t;
}

}  // namespace dummynet::mask
