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

#include <cmath>
#include <functional>

#include "dummynet/core/rng.hpp"
#include "dummynet/nn/module.hpp"

namespace dummynet::testing {

inline Tensor random_tensor(Shape s, Rng& rng, double scale = 1.0) {
  Tensor t(s);
  for (double& v : t.vec()) v = rng.normal(0.0, scale);
  return t;
}

inline double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1e-4, std::abs(a), std::abs(b)});
}

// Worst relative error between backprop and central differences of <layer(x), r>,
// over the input and every parameter entry (strided to keep it fast).
inline double layer_grad_error(nn::Layer& layer, const Tensor& x0, Rng& rng, int stride = 1,
                               double h = 1e-4) {
  nn::ParameterSet params;
  layer.register_parameters(params, "");
  nn::Tape tape;
  const Tensor y = layer.forward(x0, &tape);
  const Tensor r = random_tensor(y.shape(), rng);
  params.zero_grad();
  const Tensor dx = layer.backward(r, tape);

  auto objective = [&](const Tensor& x) { return dot(layer.forward(x, nullptr), r); };
  double worst = 0.0;
  Tensor x = x0;
  for (std::size_t i = 0; i < x.size(); i += stride) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = objective(x);
    x[i] = keep - h;
    const double down = objective(x);
    x[i] = keep;
    worst = std::max(worst, rel_err((up - down) / (2 * h), dx[i]));
  }
  for (auto& [name, p] : params.entries()) {
    for (std::size_t i = 0; i < p->value.size(); i += stride) {
      const double keep = p->value[i];
      p->value[i] = keep + h;
      const double up = objective(x0);
      p->value[i] = keep - h;
      const double down = objective(x0);
      p->value[i] = keep;
      worst = std::max(worst, rel_err((up - down) / (2 * h), p->grad[i]));
    }
  }
  return worst;
}

}  // namespace dummynet::testing
