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

#include "dummynet/core/error.hpp"
#include "dummynet/nn/functional.hpp"
#include "dummynet/nn/layers.hpp"
#include "dummynet/nn/optim.hpp"
#include "gradcheck.hpp"

using namespace dummynet;
using namespace dummynet::nn;
using dummynet::testing::layer_grad_error;
using dummynet::testing::random_tensor;

TEST_CASE("conv2d gradients match central differences") {
  Rng rng(1);
  for (auto [k, s, p] : {std::tuple{3, 1, 1}, {3, 2, 1}, {4, 2, 1}, {1, 1, 0}}) {
    Conv2d conv(3, 4, k, s, p, rng);
    const Tensor x = random_tensor({2, 3, 7, 6}, rng);
    CHECK(layer_grad_error(conv, x, rng) < 1e-6);
  }
}

TEST_CASE("conv transpose, linear and activations pass gradient checks") {
  Rng rng(2);
  ConvTranspose2d up(3, 2, 4, 2, 1, 0, rng);
  CHECK(layer_grad_error(up, random_tensor({2, 3, 4, 4}, rng), rng) < 1e-6);
  Linear fc(12, 5, rng);
  CHECK(layer_grad_error(fc, random_tensor({3, 3, 2, 2}, rng), rng) < 1e-6);
  LeakyRelu lrelu(0.2);
  CHECK(layer_grad_error(lrelu, random_tensor({2, 2, 3, 3}, rng), rng) < 1e-6);
  Sigmoid sig;
  CHECK(layer_grad_error(sig, random_tensor({2, 2, 3, 3}, rng), rng) < 1e-6);
  InstanceNorm in_plain(3);
  CHECK(layer_grad_error(in_plain, random_tensor({2, 3, 4, 5}, rng), rng) < 1e-5);
  InstanceNorm in_affine(3, true);
  CHECK(layer_grad_error(in_affine, random_tensor({2, 3, 4, 5}, rng), rng) < 1e-5);
}

TEST_CASE("pooling, upsampling and reshape pass gradient checks") {
  Rng rng(3);
  MaxPool2 pool;
  CHECK(layer_grad_error(pool, random_tensor({2, 2, 5, 6}, rng), rng) < 1e-6);
  Upsample2 up;
  CHECK(layer_grad_error(up, random_tensor({1, 2, 3, 4}, rng), rng) < 1e-6);
  Reshape rs(2, 2, 3);
  CHECK(layer_grad_error(rs, random_tensor({2, 12, 1, 1}, rng), rng) < 1e-9);
}

TEST_CASE("max pooling uses ceil mode") {
  MaxPool2 pool;
  const Tensor y = pool.forward(Tensor(1, 1, 5, 5, 1.0), nullptr);
  CHECK(y.h() == 3);
  CHECK(pool.forward(Tensor(1, 1, 1, 1, 2.0), nullptr)[0] == 2.0);
}

TEST_CASE("bilinear resize is linear and its backward is the adjoint") {
  Rng rng(4);
  const Tensor x = random_tensor({1, 2, 4, 6}, rng);
  for (auto [h, w] : {std::pair{8, 12}, {3, 5}, {16, 16}}) {
    const Tensor y = resize_bilinear(x, h, w);
    const Tensor r = random_tensor(y.shape(), rng);
    const Tensor dx = resize_bilinear_backward(r, x.shape());
    CHECK(testing::dot(y, r) == doctest::Approx(testing::dot(x, dx)).epsilon(1e-12));
  }
  const Tensor c(1, 1, 3, 3, 0.25);
  const Tensor up = upsample_bilinear(c, 2);
  CHECK(max_abs_diff(up, Tensor(1, 1, 6, 6, 0.25)) < 1e-15);
}

TEST_CASE("average pooling adjoint and area downsampling") {
  Rng rng(5);
  const Tensor x = random_tensor({2, 3, 8, 8}, rng);
  const Tensor y = avg_pool(x, 4);
  const Tensor r = random_tensor(y.shape(), rng);
  CHECK(testing::dot(y, r) == doctest::Approx(testing::dot(x, avg_pool_backward(r, x.shape()))).epsilon(1e-12));
  CHECK(mean(area_downsample(x, 1, 1)) == doctest::Approx(mean(x)).epsilon(1e-12));
  CHECK_THROWS_AS(area_downsample(x, 3, 3), Error);
}

TEST_CASE("bce with logits matches the direct formula and its gradient") {
  Rng rng(6);
  const Tensor z = random_tensor({1, 1, 3, 3}, rng, 3.0);
  Tensor t(z.shape());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform();
  Tensor g;
  const double loss = bce_with_logits(z, t, &g);
  const Tensor p = sigmoid(z);
  double direct = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i)
    direct -= t[i] * std::log(p[i]) + (1 - t[i]) * std::log(1 - p[i]);
  CHECK(loss == doctest::Approx(direct / z.size()).epsilon(1e-12));
  for (std::size_t i = 0; i < z.size(); ++i)
    CHECK(g[i] == doctest::Approx((p[i] - t[i]) / z.size()).epsilon(1e-12));
}

TEST_CASE("sequential taps feed extra gradients back") {
  Rng rng(7);
  Sequential net;
  net.add<Conv2d>(2, 3, 3, 2, 1, rng);
  net.tap();
  net.add<LeakyRelu>(0.2);
  net.add<Conv2d>(3, 1, 3, 1, 1, rng);
  const Tensor x = random_tensor({1, 2, 6, 6}, rng);
  std::vector<Tensor> taps;
  Tape tape;
  const Tensor y = net.forward_taps(x, &tape, taps);
  REQUIRE(taps.size() == 1);
  const Tensor rt = random_tensor(taps[0].shape(), rng);
  const Tensor dx = net.backward_taps(Tensor(y.shape()), {rt}, tape);
  // objective <tap(x), rt> checked by differences
  const double h = 1e-6;
  Tensor xp = x;
  for (std::size_t i = 0; i < x.size(); i += 5) {
    xp[i] = x[i] + h;
    std::vector<Tensor> tp;
    net.forward_taps(xp, nullptr, tp);
    const double up = testing::dot(tp[0], rt);
    xp[i] = x[i] - h;
    net.forward_taps(xp, nullptr, tp);
    const double down = testing::dot(tp[0], rt);
    xp[i] = x[i];
    CHECK(dx[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("adam drives a quadratic to its minimum") {
  Parameter p(Shape{1, 1, 1, 3});
  p.value.vec() = {3.0, -2.0, 0.5};
  ParameterSet set;
  set.add("p", p);
  Adam opt(set, {.lr = 0.05});
  for (int i = 0; i < 2000; ++i) {
    for (std::size_t j = 0; j < 3; ++j) p.grad[j] = 2.0 * (p.value[j] - 1.0);
    opt.step();
  }
  for (double v : p.value.vec()) CHECK(v == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("parameter sets round-trip through an archive") {
  Rng rng(8);
  Conv2d a(2, 3, 3, 1, 1, rng), b(2, 3, 3, 1, 1, rng);
  ParameterSet pa, pb;
  a.register_parameters(pa, "conv.");
  b.register_parameters(pb, "conv.");
  Archive ar("test_v1");
  pa.save_to(ar);
  pb.load_from(ar);
  CHECK(max_abs_diff(a.weight().value, b.weight().value) == 0.0);
}
