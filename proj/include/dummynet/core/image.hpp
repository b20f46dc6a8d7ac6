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

#include <filesystem>

#include "dummynet/core/tensor.hpp"

namespace dummynet {

/// Reads an 8-bit gray/RGB(A) PNG into a (1, C, H, W) tensor in [0, 1].
/// Alpha is dropped; C is 1 for gray input and 3 otherwise.
Tensor read_png(const std::filesystem::path& path);

/// Writes sample 0 of a 1- or 3-channel tensor as 8-bit PNG. Values are
/// clamped to [0, 1] and mapped linearly to 0..255 with rounding.
void write_png(const std::filesystem::path& path, const Tensor& image);

/// Mean over all pixels and channels of sample n.
double mean_intensity(const Tensor& image, int n = 0);

}  // namespace dummynet
