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

#include "dummynet/compose/compositor.hpp"

#include "dummynet/core/error.hpp"
#include "dummynet/simd/kernels.hpp"

namespace dummynet::compose {
namespace {

void check(const Tensor& mask, const Tensor& fg, const Tensor& bg) {
  if (fg.shape() != bg.shape())
    throw Error(ErrorCode::ShapeMismatch, "foreground " + fg.shape().str() + " vs background " + bg.shape().str());
  const Shape& m = mask.shape();
  const bool broadcast = m.c == 1 && m.n == fg.n() && m.h == fg.h() && m.w == fg.w();
  if (!broadcast && m != fg.shape())
    throw Error(ErrorCode::ShapeMismatch, "mask " + m.str() + " vs images " + fg.shape().str());
}

}  // namespace

void composite_into(const Tensor& mask, const Tensor& fg, Tensor& bg) {
  check(mask, fg, bg);
  const std::size_t plane = fg.shape().plane_size();
  const bool broadcast = mask.c() == 1;
  for (int n = 0; n < fg.n(); ++n)
    for (int c = 0; c < fg.c(); ++c) {
      const double* m = mask.plane(n, broadcast ? 0 : c);
      simd::blend(m, fg.plane(n, c), bg.plane(n, c), bg.plane(n, c), plane);
    }
}

Tensor composite(const Tensor& mask, const Tensor& fg, const Tensor& bg) {
  Tensor out = bg;
  composite_into(mask, fg, out);
  return out;
}

Tensor complement(const Tensor& mask) {
  Tensor out(mask.shape());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = 1.0 - mask[i];
  return out;
}

}  // namespace dummynet::compose
