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

#include "dummynet/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dummynet/core/error.hpp"
#include "dummynet/nn/functional.hpp"
#include "dummynet/simd/kernels.hpp"

namespace dummynet::nn {
namespace {

// cols has (c * k * k) rows and (oh * ow) columns.
void im2col(const double* img, int c, int h, int w, int k, int stride, int pad, int oh, int ow,
            double* cols) {
  const std::size_t plane = static_cast<std::size_t>(oh) * ow;
  for (int ch = 0; ch < c; ++ch) {
    const double* src = img + static_cast<std::size_t>(ch) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        double* dst = cols + ((static_cast<std::size_t>(ch) * k + ky) * k + kx) * plane;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ky;
          double* row = dst + static_cast<std::size_t>(oy) * ow;
          if (iy < 0 || iy >= h) {
            std::fill(row, row + ow, 0.0);
            continue;
          }
          const double* srow = src + static_cast<std::size_t>(iy) * w;
          if (stride == 1) {
            const int x0 = pad - kx;  // first ox with ix >= 0
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox - x0;
              row[ox] = (ix >= 0 && ix < w) ? srow[ix] : 0.0;
            }
          } else {
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * stride - pad + kx;
              row[ox] = (ix >= 0 && ix < w) ? srow[ix] : 0.0;
            }
          }
        }
      }
    }
  }
}

// Adjoint of im2col: accumulates cols into img (img must be zeroed first).
void col2im(const double* cols, int c, int h, int w, int k, int stride, int pad, int oh, int ow,
            double* img) {
  const std::size_t plane = static_cast<std::size_t>(oh) * ow;
  for (int ch = 0; ch < c; ++ch) {
    double* dst = img + static_cast<std::size_t>(ch) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const double* src = cols + ((static_cast<std::size_t>(ch) * k + ky) * k + kx) * plane;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          const double* row = src + static_cast<std::size_t>(oy) * ow;
          double* drow = dst + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < w) drow[ix] += row[ox];
          }
        }
      }
    }
  }
}

void he_init(Tensor& w, int fan_in, double gain, Rng& rng) {
  const double stddev = gain / std::sqrt(static_cast<double>(std::max(fan_in, 1)));
  for (double& v : w.vec()) v = rng.normal(0.0, stddev);
}

thread_local std::vector<double> g_cols;
thread_local std::vector<double> g_dcols;

double* scratch(std::vector<double>& buf, std::size_t n) {
  if (buf.size() < n) buf.resize(n);
  return buf.data();
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(int in_channels, int out_channels, int kernel, int stride, int pad, Rng& rng,
               bool bias, double gain)
    : cin_(in_channels),
      cout_(out_channels),
      kernel_(kernel),
      stride_(stride),
      pad_(pad),
      has_bias_(bias),
      weight_(Shape{out_channels, in_channels, kernel, kernel}),
      bias_(Shape{1, bias ? out_channels : 0, 1, 1}) {
  he_init(weight_.value, in_channels * kernel * kernel, gain, rng);
}

void Conv2d::register_parameters(ParameterSet& set, const std::string& prefix) {
  set.add(prefix + "weight", weight_);
  if (has_bias_) set.add(prefix + "bias", bias_);
}

Tensor Conv2d::forward(const Tensor& x, Tape* tape) const {
  if (x.c() != cin_)
    throw Error(ErrorCode::ShapeMismatch, "Conv2d expects " + std::to_string(cin_) + " channels, got " +
                                              x.shape().str());
  const int oh = out_size(x.h());
  const int ow = out_size(x.w());
  if (oh <= 0 || ow <= 0) throw Error(ErrorCode::ShapeMismatch, "Conv2d input too small " + x.shape().str());
  Tensor y(x.n(), cout_, oh, ow);
  const int ckk = cin_ * kernel_ * kernel_;
  const int opix = oh * ow;
  const bool direct = kernel_ == 1 && stride_ == 1 && pad_ == 0;
  double* cols = direct ? nullptr : scratch(g_cols, static_cast<std::size_t>(ckk) * opix);
  for (int n = 0; n < x.n(); ++n) {
    const double* b = x.sample(n);
    if (!direct) {
      im2col(x.sample(n), cin_, x.h(), x.w(), kernel_, stride_, pad_, oh, ow, cols);
      b = cols;
    }
    double* out = y.sample(n);
    simd::gemm(cout_, opix, ckk, weight_.value.data(), ckk, b, opix, out, opix, false);
    if (has_bias_)
      for (int c = 0; c < cout_; ++c) {
        const double bv = bias_.value[c];
        double* p = out + static_cast<std::size_t>(c) * opix;
        for (int i = 0; i < opix; ++i) p[i] += bv;
      }
  }
  if (tape) tape->push(x);
  return y;
}

Tensor Conv2d::backward(const Tensor& dy, Tape& tape) {
  const Tensor x = tape.pop();
  const int oh = dy.h();
  const int ow = dy.w();
  const int ckk = cin_ * kernel_ * kernel_;
  const int opix = oh * ow;
  const bool direct = kernel_ == 1 && stride_ == 1 && pad_ == 0;
  Tensor dx(x.shape());
  double* cols = direct ? nullptr : scratch(g_cols, static_cast<std::size_t>(ckk) * opix);
  double* dcols = direct ? nullptr : scratch(g_dcols, static_cast<std::size_t>(ckk) * opix);
  for (int n = 0; n < x.n(); ++n) {
    const double* g = dy.sample(n);
    if (tape.param_grads()) {
      const double* b = x.sample(n);
      if (!direct) {
        im2col(x.sample(n), cin_, x.h(), x.w(), kernel_, stride_, pad_, oh, ow, cols);
        b = cols;
      }
      simd::gemm_nt(cout_, ckk, opix, g, opix, b, opix, weight_.grad.data(), ckk, true);
      if (has_bias_)
        for (int c = 0; c < cout_; ++c) {
          const double* p = g + static_cast<std::size_t>(c) * opix;
          double s = 0.0;
          for (int i = 0; i < opix; ++i) s += p[i];
          bias_.grad[c] += s;
        }
    }
    if (direct) {
      simd::gemm_tn(ckk, opix, cout_, weight_.value.data(), ckk, g, opix, dx.sample(n), opix, false);
    } else {
      simd::gemm_tn(ckk, opix, cout_, weight_.value.data(), ckk, g, opix, dcols, opix, false);
      col2im(dcols, cin_, x.h(), x.w(), kernel_, stride_, pad_, oh, ow, dx.sample(n));
    }
  }
  return dx;
}

// ------------------------------------------------------- ConvTranspose2d

ConvTranspose2d::ConvTranspose2d(int in_channels, int out_channels, int kernel, int stride, int pad,
                                 int output_pad, Rng& rng)
    : cin_(in_channels),
      cout_(out_channels),
      kernel_(kernel),
      stride_(stride),
      pad_(pad),
      output_pad_(output_pad),
      weight_(Shape{in_channels, out_channels, kernel, kernel}),
      bias_(Shape{1, out_channels, 1, 1}) {
  // Each output pixel receives about cin * k * k / stride^2 contributions.
  he_init(weight_.value, in_channels * kernel * kernel / std::max(1, stride * stride), 1.4142135623730951, rng);
}

void ConvTranspose2d::register_parameters(ParameterSet& set, const std::string& prefix) {
  set.add(prefix + "weight", weight_);
  set.add(prefix + "bias", bias_);
}

Tensor ConvTranspose2d::forward(const Tensor& x, Tape* tape) const {
  if (x.c() != cin_) throw Error(ErrorCode::ShapeMismatch, "ConvTranspose2d channel mismatch " + x.shape().str());
  const int oh = out_size(x.h());
  const int ow = out_size(x.w());
  const int ckk = cout_ * kernel_ * kernel_;
  const int ipix = x.h() * x.w();
  Tensor y(x.n(), cout_, oh, ow);
  double* cols = scratch(g_cols, static_cast<std::size_t>(ckk) * ipix);
  for (int n = 0; n < x.n(); ++n) {
    simd::gemm_tn(ckk, ipix, cin_, weight_.value.data(), ckk, x.sample(n), ipix, cols, ipix, false);
    col2im(cols, cout_, oh, ow, kernel_, stride_, pad_, x.h(), x.w(), y.sample(n));
    for (int c = 0; c < cout_; ++c) {
      double* p = y.plane(n, c);
      for (int i = 0; i < oh * ow; ++i) p[i] += bias_.value[c];
    }
  }
  if (tape) tape->push(x);
  return y;
}

Tensor ConvTranspose2d::backward(const Tensor& dy, Tape& tape) {
  const Tensor x = tape.pop();
  const int ckk = cout_ * kernel_ * kernel_;
  const int ipix = x.h() * x.w();
  Tensor dx(x.shape());
  double* dcols = scratch(g_dcols, static_cast<std::size_t>(ckk) * ipix);
  for (int n = 0; n < x.n(); ++n) {
    im2col(dy.sample(n), cout_, dy.h(), dy.w(), kernel_, stride_, pad_, x.h(), x.w(), dcols);
    simd::gemm(cin_, ipix, ckk, weight_.value.data(), ckk, dcols, ipix, dx.sample(n), ipix, false);
    if (tape.param_grads()) {
      simd::gemm_nt(cin_, ckk, ipix, x.sample(n), ipix, dcols, ipix, weight_.grad.data(), ckk, true);
      for (int c = 0; c < cout_; ++c) {
        const double* p = dy.plane(n, c);
        double s = 0.0;
        for (int i = 0; i < dy.h() * dy.w(); ++i) s += p[i];
        bias_.grad[c] += s;
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------- Linear

Linear::Linear(int in_features, int out_features, Rng& rng, double gain)
    : in_(in_features),
      out_(out_features),
      weight_(Shape{out_features, in_features, 1, 1}),
      bias_(Shape{1, out_features, 1, 1}) {
  he_init(weight_.value, in_features, gain, rng);
}

void Linear::register_parameters(ParameterSet& set, const std::string& prefix) {
  set.add(prefix + "weight", weight_);
  set.add(prefix + "bias", bias_);
}

Tensor Linear::forward(const Tensor& x, Tape* tape) const {
  if (static_cast<int>(x.shape().sample_size()) != in_)
    throw Error(ErrorCode::ShapeMismatch, "Linear expects " + std::to_string(in_) + " features, got " +
                                              x.shape().str());
  Tensor y(x.n(), out_, 1, 1);
  simd::gemm_nt(x.n(), out_, in_, x.data(), in_, weight_.value.data(), in_, y.data(), out_, false);
  for (int n = 0; n < x.n(); ++n)
    for (int o = 0; o < out_; ++o) y[static_cast<std::size_t>(n) * out_ + o] += bias_.value[o];
  if (tape) tape->push(x);
  return y;
}

Tensor Linear::backward(const Tensor& dy, Tape& tape) {
  const Tensor x = tape.pop();
  const int batch = x.n();
  if (tape.param_grads()) {
    simd::gemm_tn(out_, in_, batch, dy.data(), out_, x.data(), in_, weight_.grad.data(), in_, true);
    for (int n = 0; n < batch; ++n)
      for (int o = 0; o < out_; ++o) bias_.grad[o] += dy[static_cast<std::size_t>(n) * out_ + o];
  }
  Tensor dx(x.shape());
  simd::gemm(batch, in_, out_, dy.data(), out_, weight_.value.data(), in_, dx.data(), in_, false);
  return dx;
}

// ----------------------------------------------------------- activations

Tensor LeakyRelu::forward(const Tensor& x, Tape* tape) const {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : slope_ * x[i];
  if (tape) tape->push(x);
  return y;
}

Tensor LeakyRelu::backward(const Tensor& dy, Tape& tape) {
  const Tensor x = tape.pop();
  Tensor dx(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > 0.0 ? dy[i] : slope_ * dy[i];
  return dx;
}

Tensor Sigmoid::forward(const Tensor& x, Tape* tape) const {
  Tensor y = sigmoid(x);
  if (tape) tape->push(y);
  return y;
}

Tensor Sigmoid::backward(const Tensor& dy, Tape& tape) {
  const Tensor y = tape.pop();
  Tensor dx(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = dy[i] * y[i] * (1.0 - y[i]);
  return dx;
}

// ---------------------------------------------------------- InstanceNorm

InstanceNorm::InstanceNorm(int channels, bool affine, double eps)
    : channels_(channels),
      affine_(affine),
      eps_(eps),
      gamma_(Shape{1, affine ? channels : 0, 1, 1}),
      beta_(Shape{1, affine ? channels : 0, 1, 1}) {
  gamma_.value.fill(1.0);
}

void InstanceNorm::register_parameters(ParameterSet& set, const std::string& prefix) {
  if (!affine_) return;
  set.add(prefix + "gamma", gamma_);
  set.add(prefix + "beta", beta_);
}

Tensor InstanceNorm::forward(const Tensor& x, Tape* tape) const {
  if (x.c() != channels_) throw Error(ErrorCode::ShapeMismatch, "InstanceNorm channel mismatch");
  const std::size_t plane = x.shape().plane_size();
  Tensor xhat(x.shape());
  Tensor inv_std(x.n(), x.c(), 1, 1);
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c) {
      const double* p = x.plane(n, c);
      double mean = 0.0;
      for (std::size_t i = 0; i < plane; ++i) mean += p[i];
      mean /= static_cast<double>(plane);
      double var = 0.0;
      for (std::size_t i = 0; i < plane; ++i) var += (p[i] - mean) * (p[i] - mean);
      var /= static_cast<double>(plane);
      const double is = 1.0 / std::sqrt(var + eps_);
      inv_std(n, c, 0, 0) = is;
      double* q = xhat.plane(n, c);
      for (std::size_t i = 0; i < plane; ++i) q[i] = (p[i] - mean) * is;
    }
  Tensor y = xhat;
  if (affine_)
    for (int n = 0; n < x.n(); ++n)
      for (int c = 0; c < x.c(); ++c) {
        double* q = y.plane(n, c);
        for (std::size_t i = 0; i < plane; ++i) q[i] = gamma_.value[c] * q[i] + beta_.value[c];
      }
  if (tape) {
    tape->push(std::move(xhat));
    tape->push(std::move(inv_std));
  }
  return y;
}

Tensor InstanceNorm::backward(const Tensor& dy, Tape& tape) {
  const Tensor inv_std = tape.pop();
  const Tensor xhat = tape.pop();
  const std::size_t plane = xhat.shape().plane_size();
  const double inv_plane = 1.0 / static_cast<double>(plane);
  Tensor dx(xhat.shape());
  for (int n = 0; n < xhat.n(); ++n)
    for (int c = 0; c < xhat.c(); ++c) {
      const double* g = dy.plane(n, c);
      const double* xh = xhat.plane(n, c);
      const double gain = affine_ ? gamma_.value[c] : 1.0;
      double sum_g = 0.0, sum_gx = 0.0;
      for (std::size_t i = 0; i < plane; ++i) {
        sum_g += g[i];
        sum_gx += g[i] * xh[i];
      }
      if (affine_ && tape.param_grads()) {
        gamma_.grad[c] += sum_gx;
        beta_.grad[c] += sum_g;
      }
      const double mg = sum_g * gain * inv_plane;
      const double mgx = sum_gx * gain * inv_plane;
      const double is = inv_std(n, c, 0, 0);
      double* d = dx.plane(n, c);
      for (std::size_t i = 0; i < plane; ++i) d[i] = is * (gain * g[i] - mg - xh[i] * mgx);
    }
  return dx;
}

// -------------------------------------------------------------- pooling

Tensor MaxPool2::forward(const Tensor& x, Tape* tape) const {
  const int oh = (x.h() + 1) / 2;
  const int ow = (x.w() + 1) / 2;
  Tensor y(x.n(), x.c(), oh, ow);
  Tensor arg(x.n(), x.c(), oh, ow);
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c)
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          double best = -std::numeric_limits<double>::infinity();
          int best_idx = 0;
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
              const int iy = 2 * oy + dy;
              const int ix = 2 * ox + dx;
              if (iy >= x.h() || ix >= x.w()) continue;
              const double v = x(n, c, iy, ix);
              if (v > best) {
                best = v;
                best_idx = iy * x.w() + ix;
              }
            }
          y(n, c, oy, ox) = best;
          arg(n, c, oy, ox) = best_idx;
        }
  if (tape) {
    tape->push_shape(x.shape());
    tape->push(std::move(arg));
  }
  return y;
}

Tensor MaxPool2::backward(const Tensor& dy, Tape& tape) {
  const Tensor arg = tape.pop();
  Tensor dx(tape.pop_shape());
  for (int n = 0; n < dy.n(); ++n)
    for (int c = 0; c < dy.c(); ++c) {
      double* d = dx.plane(n, c);
      const double* g = dy.plane(n, c);
      const double* a = arg.plane(n, c);
      for (std::size_t i = 0; i < dy.shape().plane_size(); ++i) d[static_cast<std::size_t>(a[i])] += g[i];
    }
  return dx;
}

Tensor Upsample2::forward(const Tensor& x, Tape* tape) const {
  if (tape) tape->push_shape(x.shape());
  return upsample_bilinear(x, 2);
}

Tensor Upsample2::backward(const Tensor& dy, Tape& tape) {
  return upsample_bilinear_backward(dy, tape.pop_shape());
}

Tensor Reshape::forward(const Tensor& x, Tape* tape) const {
  if (tape) tape->push_shape(x.shape());
  return x.reshaped(Shape{x.n(), c_, h_, w_});
}

Tensor Reshape::backward(const Tensor& dy, Tape& tape) {
  return dy.reshaped(tape.pop_shape());
}

}  // namespace dummynet::nn
