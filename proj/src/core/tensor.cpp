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

#include "dummynet/core/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dummynet/core/error.hpp"
#include "dummynet/simd/kernels.hpp"

namespace dummynet {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegeneratePose: return "DegeneratePose";
    case ErrorCode::TooFewMembers: return "TooFewMembers";
    case ErrorCode::ResolutionMismatch: return "ResolutionMismatch";
    case ErrorCode::DegenerateHull: return "DegenerateHull";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::BadResolution: return "BadResolution";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::NoValidPlacement: return "NoValidPlacement";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::NoSamples: return "NoSamples";
    case ErrorCode::NoGroundTruth: return "NoGroundTruth";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::MissingArtifact: return "MissingArtifact";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

std::string Shape::str() const {
  std::ostringstream os;
  os << "(" << n << ", " << c << ", " << h << ", " << w << ")";
  return os.str();
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(shape.size(), fill) {
  if (shape.n < 0 || shape.c < 0 || shape.h < 0 || shape.w < 0)
    throw Error(ErrorCode::ShapeMismatch, "negative tensor extent " + shape.str());
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Tensor Tensor::reshaped(Shape shape) const {
  if (shape.size() != size())
    throw Error(ErrorCode::ShapeMismatch, "reshape " + shape_.str() + " -> " + shape.str());
  Tensor out = *this;
  out.shape_ = shape;
  return out;
}

Tensor Tensor::batch_slice(int begin, int count) const {
  if (begin < 0 || count < 0 || begin + count > shape_.n)
    throw Error(ErrorCode::ShapeMismatch, "batch slice out of range");
  Tensor out(Shape{count, shape_.c, shape_.h, shape_.w});
  std::copy_n(sample(begin), out.size(), out.data());
  return out;
}

Tensor concat_batch(std::span<const Tensor> parts) {
  if (parts.empty()) return {};
  Shape s = parts.front().shape();
  int total = 0;
  for (const Tensor& p : parts) {
    const Shape& q = p.shape();
    if (q.c != s.c || q.h != s.h || q.w != s.w)
      throw Error(ErrorCode::ShapeMismatch, "concat_batch: " + q.str() + " vs " + s.str());
    total += q.n;
  }
  s.n = total;
  Tensor out(s);
  double* dst = out.data();
  for (const Tensor& p : parts) dst = std::copy(p.data(), p.data() + p.size(), dst);
  return out;
}

Tensor concat_channels(std::span<const Tensor> parts) {
  if (parts.empty()) return {};
  Shape s = parts.front().shape();
  int channels = 0;
  for (const Tensor& p : parts) {
    const Shape& q = p.shape();
    if (q.n != s.n || q.h != s.h || q.w != s.w)
      throw Error(ErrorCode::ShapeMismatch, "concat_channels: " + q.str() + " vs " + s.str());
    channels += q.c;
  }
  s.c = channels;
  Tensor out(s);
  for (int n = 0; n < s.n; ++n) {
    double* dst = out.sample(n);
    for (const Tensor& p : parts)
      dst = std::copy(p.sample(n), p.sample(n) + p.shape().sample_size(), dst);
  }
  return out;
}

Tensor slice_channels(const Tensor& t, int begin, int count) {
  if (begin < 0 || count < 0 || begin + count > t.c())
    throw Error(ErrorCode::ShapeMismatch, "slice_channels out of range");
  Tensor out(t.n(), count, t.h(), t.w());
  const std::size_t plane = t.shape().plane_size();
  for (int n = 0; n < t.n(); ++n)
    std::copy_n(t.plane(n, begin), count * plane, out.sample(n));
  return out;
}

void add_inplace(Tensor& y, const Tensor& x, double alpha) {
  if (y.shape() != x.shape())
    throw Error(ErrorCode::ShapeMismatch, "add " + x.shape().str() + " to " + y.shape().str());
  simd::axpy(alpha, x.data(), y.data(), y.size());
}

void scale_inplace(Tensor& t, double s) {
  for (double& v : t.vec()) v *= s;
}

double sum(const Tensor& t) {
  double s = 0.0;
  for (double v : t.vec()) s += v;
  return s;
}

double mean(const Tensor& t) { return t.empty() ? 0.0 : sum(t) / static_cast<double>(t.size()); }

double max_abs(const Tensor& t) {
  double m = 0.0;
  for (double v : t.vec()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw Error(ErrorCode::ShapeMismatch, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double mean_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw Error(ErrorCode::ShapeMismatch, "mean_abs_diff");
  if (a.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

bool all_finite(const Tensor& t) {
  return std::all_of(t.vec().begin(), t.vec().end(), [](double v) { return std::isfinite(v); });
}

}  // namespace dummynet
