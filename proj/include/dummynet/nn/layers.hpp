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

#pragma once

#include "dummynet/core/rng.hpp"
#include "dummynet/nn/module.hpp"

namespace dummynet::nn {

/// 2-D convolution, weight (cout, cin, k, k), zero padding.
class Conv2d : public Layer {
 public:
  Conv2d(int in_channels, int out_channels, int kernel, int stride, int pad, Rng& rng,
         bool bias = true, double gain = 1.4142135623730951);

  Tensor forward(const Tensor& x, Tape* tape) const override;
  Tensor backward(const Tensor& dy, Tape& tape) override;
  void register_parameters(ParameterSet& set, const std::string& prefix) override;

  int out_size(int in) const { return (in + 2 * pad_ - kernel_) / stride_ + 1; }
  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }

 private:
  int cin_, cout_, kernel_, stride_, pad_;
  bool has_bias_;
  Parameter weight_;
  Parameter bias_;
};

/// Transposed convolution (adjoint of Conv2d), weight (cin, cout, k, k).
class ConvTranspose2d : public Layer {
 public:
  ConvTranspose2d(int in_channels, int out_channels, int kernel, int stride, int pad,
                  int output_pad, Rng& rng);

  Tensor forward(const Tensor& x, Tape* tape) const override;
  Tensor backward(const Tensor& dy, Tape& tape) override;
  void register_parameters(ParameterSet& set, const std::string& prefix) override;

  int out_size(int in) const { return (in - 1) * stride_ - 2 * pad_ + kernel_ + output_pad_; }

 private:
  int cin_, cout_, kernel_, stride_, pad_, output_pad_;
  Parameter weight_;
  Parameter bias_;
};

/// Fully connected layer on the flattened sample; output (n, out, 1, 1).
class Linear : public Layer {
 public:
  Linear(int in_features, int out_features, Rng& rng, double gain = 1.0);

  Tensor forward(const Tensor& x, Tape* tape) const override;
  Tensor backward(const Tensor& dy, Tape& tape) override;
  void register_parameters(ParameterSet& set, const std::string& prefix) override;

  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }

 private:
  int in_, out_;
  Parameter weight_;
  Parameter bias_;
};

/// max(x, slope * x); slope 0 is ReLU.
class LeakyRelu : public Layer {
 public:
  explicit LeakyRelu(double slope = 0.0) : slope_(slope) {}
  Tensor forward(const Tensor& x, Tape* tape) const override;
  Tensor backward(const Tensor& dy, Tape& tape) override;

 private:
  double slope_;
};

class Sigmoid : public Layer {
 public:
  Tensor forward(const Tensor& x, Tape* tape) const override;
  Tensor backward(const Tensor& dy, Tape& tape) override;
};

/// Per-sample, per-channel normalization over H x W, optional affine.
class InstanceNorm : public Layer {
 public:
  explicit InstanceNorm(int channels, bool affine = false, double eps = 1e-5);
  Tensor forward(const Tensor& x, Tape* tape) const override;
  Tensor backward(const Tensor& dy, Tape& tape) override;
  void register_parameters(ParameterSet& set, const std::string& prefix) override;

 private:
  int channels_;
  bool affine_;
  double eps_;
  Parameter gamma_;
  Parameter beta_;
};

/// 2 x 2 max pooling, stride 2, ceil mode (odd/unit extents keep a partial
/// window, so 1 x 1 maps to 1 x 1).
class MaxPool2 : public Layer {
 public:
  Tensor forward(const Tensor& x, Tape* tape) const override;
  Tensor backward(const Tensor& dy, Tape& tape) override;
};

/// Factor-2 bilinear upsampling as a layer.
class Upsample2 : public Layer {
 public:
  Tensor forward(const Tensor& x, Tape* tape) const override;
  Tensor backward(const Tensor& dy, Tape& tape) override;
};

/// Reshape of each sample to (c, h, w); used between Linear and conv stacks.
class Reshape : public Layer {
 public:
  Reshape(int c, int h, int w) : c_(c), h_(h), w_(w) {}
  Tensor forward(const Tensor& x, Tape* tape) const override;
  Tensor backward(const Tensor& dy, Tape& tape) override;

 private:
  int c_, h_, w_;
};

}  // namespace dummynet::nn
