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

namespace dummynet::compose {

/// I_aug = M * I_gen + (1 - M) * I_bg, per pixel. The mask has one channel
/// (broadcast over colors) or as many as the images. Results are clamped to
/// the per-pixel range of the two inputs.
Tensor composite(const Tensor& mask, const Tensor& fg, const Tensor& bg);

/// In-place variant writing into `bg`.
void composite_into(const Tensor& mask, const Tensor& fg, Tensor& bg);

/// 1 - mask.
Tensor complement(const Tensor& mask);

}  // namespace dummynet::compose
