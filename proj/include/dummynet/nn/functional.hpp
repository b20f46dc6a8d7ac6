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

#include "dummynet/core/tensor.hpp"

namespace dummynet::nn {

// Stateless resampling ops with explicit adjoints. Bilinear sampling follows
// the half-pixel-center convention (align_corners = false).

Tensor resize_bilinear(const Tensor& x, int out_h, int out_w);
Tensor resize_bilinear_backward(const Tensor& dy, const Shape& in_shape);

Tensor upsample_bilinear(const Tensor& x, int factor);
Tensor upsample_bilinear_backward(const Tensor& dy, const Shape& in_shape);

/// Area averaging over factor x factor blocks; extents must divide.
Tensor avg_pool(const Tensor& x, int factor);
Tensor avg_pool_backward(const Tensor& dy, const Shape& in_shape);

/// Area-average to a target size (integer ratio required).
Tensor area_downsample(const Tensor& x, int out_h, int out_w);

/// Broadcast-multiply every channel of x by the single-channel m (same n, h, w).
Tensor mul_channels(const Tensor& x, const Tensor& m);

Tensor sigmoid(const Tensor& x);

/// Mean binary cross-entropy of sigmoid(logits) against targets, and its
/// gradient w.r.t. the logits (already divided by the element count).
double bce_with_logits(const Tensor& logits, const Tensor& targets, Tensor* grad);

}  // namespace dummynet::nn
