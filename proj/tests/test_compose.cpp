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

#include <doctest.h>

#include "dummynet/compose/compositor.hpp"
#include "dummynet/core/error.hpp"
#include "dummynet/core/rng.hpp"

using namespace dummynet;
using compose::complement;
using compose::composite;

namespace {

Tensor random_image(Rng& rng, int c = 3) {
  Tensor t(2, c, 9, 7);
  for (double& v : t.vec()) v = rng.uniform();
  return t;
}

// Masks on a 1/256 grid have exactly representable complements.
Tensor dyadic_mask(Rng& rng) {
  Tensor m(2, 1, 9, 7);
  for (double& v : m.vec()) v = rng.uniform_int(0, 256) / 256.0;
  return m;
}

Tensor binary_mask(Rng& rng) {
  Tensor m(2, 1, 9, 7);
  for (double& v : m.vec()) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
  return m;
}

}  // namespace

TEST_CASE("constant masks select one input") {
  Rng rng(1);
  const Tensor fg = random_image(rng), bg = random_image(rng);
  CHECK(composite(Tensor(2, 1, 9, 7, 1.0), fg, bg).vec() == fg.vec());
  CHECK(composite(Tensor(2, 1, 9, 7, 0.0), fg, bg).vec() == bg.vec());
  const Tensor half = composite(Tensor(2, 1, 9, 7, 0.5), Tensor(fg.shape(), 1.0), Tensor(fg.shape(), 0.0));
  for (double v : half.vec()) CHECK(v == 0.5);
}

TEST_CASE("compositing with a binary mask is idempotent") {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const Tensor m = binary_mask(rng);
    const Tensor fg = random_image(rng), bg = random_image(rng);
    const Tensor aug = composite(m, fg, bg);
    CHECK(composite(m, aug, bg).vec() == aug.vec());
  }
}

TEST_CASE("swapping inputs and complementing the mask gives the same image") {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const Tensor m = dyadic_mask(rng);
    const Tensor fg = random_image(rng), bg = random_image(rng);
    CHECK(composite(complement(m), bg, fg).vec() == composite(m, fg, bg).vec());
  }
  // Arbitrary masks: complements round, so agreement is to the last bits.
  Tensor m(2, 1, 9, 7);
  for (double& v : m.vec()) v = rng.uniform();
  const Tensor fg = random_image(rng), bg = random_image(rng);
  CHECK(max_abs_diff(composite(complement(m), bg, fg), composite(m, fg, bg)) <= 1e-15);
}

TEST_CASE("output is bounded by the per-pixel range of the inputs") {
  Rng rng(4);
  Tensor m(2, 1, 9, 7);
  for (double& v : m.vec()) v = rng.uniform();
  const Tensor fg = random_image(rng), bg = random_image(rng);
  const Tensor out = composite(m, fg, bg);
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out[i] >= std::min(fg[i], bg[i]));
    CHECK(out[i] <= std::max(fg[i], bg[i]));
  }
}

TEST_CASE("per-channel masks and shape errors") {
  Rng rng(5);
  const Tensor fg = random_image(rng), bg = random_image(rng);
  Tensor m3(fg.shape(), 1.0);
  CHECK(composite(m3, fg, bg).vec() == fg.vec());
  CHECK_THROWS_AS(composite(Tensor(2, 1, 8, 7), fg, bg), Error);
  CHECK_THROWS_AS(composite(Tensor(2, 1, 9, 7), fg, Tensor(2, 3, 9, 8)), Error);
}
