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

#include "dummynet/nn/functional.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dummynet/core/error.hpp"

namespace dummynet::nn {
namespace {

struct Tap {
  int i0, i1;
  double w0, w1;
};

std::vector<Tap> bilinear_taps(int in, int out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    double src = (o + 0.5) * scale - 0.5;
    if (src < 0.0) src = 0.0;
    int i0 = static_cast<int>(std::floor(src));
    if (i0 > in - 1) i0 = in - 1;
    const int i1 = std::min(i0 + 1, in - 1);
    const double frac = src - i0;
    taps[o] = Tap{i0, i1, 1.0 - frac, frac};
  }
  return taps;
}

}  // namespace

Tensor resize_bilinear(const Tensor& x, int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0) throw Error(ErrorCode::ShapeMismatch, "resize to empty extent");
  if (out_h == x.h() && out_w == x.w()) return x;
  const auto ty = bilinear_taps(x.h(), out_h);
  const auto tx = bilinear_taps(x.w(), out_w);
  Tensor y(x.n(), x.c(), out_h, out_w);
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c) {
      const double* src = x.plane(n, c);
      double* dst = y.plane(n, c);
      for (int oy = 0; oy < out_h; ++oy) {
        const Tap& a = ty[oy];
        const double* r0 = src + static_cast<std::size_t>(a.i0) * x.w();
        const double* r1 = src + static_cast<std::size_t>(a.i1) * x.w();
        for (int ox = 0; ox < out_w; ++ox) {
          const Tap& b = tx[ox];
          dst[static_cast<std::size_t>(oy) * out_w + ox] =
              a.w0 * (b.w0 * r0[b.i0] + b.w1 * r0[b.i1]) + a.w1 * (b.w0 * r1[b.i0] + b.w1 * r1[b.i1]);
        }
      }
    }
  return y;
}

Tensor resize_bilinear_backward(const Tensor& dy, const Shape& in_shape) {
  if (dy.h() == in_shape.h && dy.w() == in_shape.w) return dy;
  const auto ty = bilinear_taps(in_shape.h, dy.h());
  const auto tx = bilinear_taps(in_shape.w, dy.w());
  Tensor dx(in_shape);
  for (int n = 0; n < dy.n(); ++n)
    for (int c = 0; c < dy.c(); ++c) {
      const double* g = dy.plane(n, c);
      double* d = dx.plane(n, c);
      for (int oy = 0; oy < dy.h(); ++oy) {
        const Tap& a = ty[oy];
        double* r0 = d + static_cast<std::size_t>(a.i0) * in_shape.w;
        double* r1 = d + static_cast<std::size_t>(a.i1) * in_shape.w;
        for (int ox = 0; ox < dy.w(); ++ox) {
          const Tap& b = tx[ox];
          const double v = g[static_cast<std::size_t>(oy) * dy.w() + ox];
          r0[b.i0] += a.w0 * b.w0 * v;
          r0[b.i1] += a.w0 * b.w1 * v;
          r1[b.i0] += a.w1 * b.w0 * v;
          r1[b.i1] += a.w1 * b.w1 * v;
        }
      }
    }
  return dx;
}

Tensor upsample_bilinear(const Tensor& x, int factor) {
  return resize_bilinear(x, x.h() * factor, x.w() * factor);
}

Tensor upsample_bilinear_backward(const Tensor& dy, const Shape& in_shape) {
  return resize_bilinear_backward(dy, in_shape);
}

Tensor avg_pool(const Tensor& x, int factor) {
  if (factor == 1) return x;
  if (factor <= 0 || x.h() % factor != 0 || x.w() % factor != 0)
    throw Error(ErrorCode::ShapeMismatch, "avg_pool factor " + std::to_string(factor) + " on " + x.shape().str());
  const int oh = x.h() / factor;
  const int ow = x.w() / factor;
  const double inv = 1.0 / (factor * factor);
  Tensor y(x.n(), x.c(), oh, ow);
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c) {
      const double* src = x.plane(n, c);
      double* dst = y.plane(n, c);
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          double s = 0.0;
          for (int dy = 0; dy < factor; ++dy)
            for (int dx = 0; dx < factor; ++dx)
              s += src[static_cast<std::size_t>(oy * factor + dy) * x.w() + ox * factor + dx];
          dst[static_cast<std::size_t>(oy) * ow + ox] = s * inv;
        }
    }
  return y;
}

Tensor avg_pool_backward(const Tensor& dy, const Shape& in_shape) {
  const int factor = in_shape.h / dy.h();
  if (factor == 1) return dy;
  const double inv = 1.0 / (factor * factor);
  Tensor dx(in_shape);
  for (int n = 0; n < dy.n(); ++n)
    for (int c = 0; c < dy.c(); ++c) {
      const double* g = dy.plane(n, c);
      double* d = dx.plane(n, c);
      for (int oy = 0; oy < dy.h(); ++oy)
        for (int ox = 0; ox < dy.w(); ++ox) {
          const double v = g[static_cast<std::size_t>(oy) * dy.w() + ox] * inv;
          for (int ky = 0; ky < factor; ++ky)
            for (int kx = 0; kx < factor; ++kx)
              d[static_cast<std::size_t>(oy * factor + ky) * in_shape.w + ox * factor + kx] = v;
        }
    }
  return dx;
}

Tensor area_downsample(const Tensor& x, int out_h, int out_w) {
  if (out_h <= 0 || x.h() % out_h != 0 || x.w() % out_w != 0 || x.h() / out_h != x.w() / out_w)
    throw Error(ErrorCode::ShapeMismatch,
                "area_downsample " + x.shape().str() + " -> " + std::to_string(out_h) + "x" + std::to_string(out_w));
  return avg_pool(x, x.h() / out_h);
}

Tensor mul_channels(const Tensor& x, const Tensor& m) {
  if (m.c() != 1 || m.n() != x.n() || m.h() != x.h() || m.w() != x.w())
    throw Error(ErrorCode::ShapeMismatch, "mul_channels " + x.shape().str() + " by " + m.shape().str());
  Tensor y(x.shape());
  const std::size_t plane = x.shape().plane_size();
  for (int n = 0; n < x.n(); ++n) {
    const double* mp = m.plane(n, 0);
    for (int c = 0; c < x.c(); ++c) {
      const double* xp = x.plane(n, c);
      double* yp = y.plane(n, c);
      for (std::size_t i = 0; i < plane; ++i) yp[i] = xp[i] * mp[i];
    }
  }
  return y;
}

Tensor sigmoid(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i];
    if (v >= 0) {
      y[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      y[i] = e / (1.0 + e);
    }
  }
  return y;
}

double bce_with_logits(const Tensor& logits, const Tensor& targets, Tensor* grad) {
  if (logits.shape() != targets.shape())
    throw Error(ErrorCode::ShapeMismatch, "bce " + logits.shape().str() + " vs " + targets.shape().str());
  const double inv = logits.empty() ? 0.0 : 1.0 / static_cast<double>(logits.size());
  if (grad) *grad = Tensor(logits.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits[i];
    const double t = targets[i];
    // log(1 + exp(-|z|)) + max(z, 0) - z * t
    total += std::log1p(std::exp(-std::abs(z))) + std::max(z, 0.0) - z * t;
    if (grad) {
      const double p = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
      (*grad)[i] = (p - t) * inv;
    }
  }
  return total * inv;
}

}  // namespace dummynet::nn
