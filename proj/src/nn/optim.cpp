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

#include "dummynet/nn/optim.hpp"

#include <cmath>

namespace dummynet::nn {

Adam::Adam(const ParameterSet& params, AdamOptions options) : params_(params), options_(options) {
  for (const auto& [name, p] : params_.entries()) {
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

void Adam::step() {
  ++t_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double step = options_.lr * std::sqrt(c2) / c1;
  const auto& entries = params_.entries();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    Parameter& p = *entries[k].second;
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      p.value[i] -= step * m[i] / (std::sqrt(v[i]) + options_.eps);
    }
  }
}

Sgd::Sgd(const ParameterSet& params, SgdOptions options) : params_(params), options_(options) {
  for (const auto& [name, p] : params_.entries()) velocity_.emplace_back(p->value.shape());
}

void Sgd::step() {
  const auto& entries = params_.entries();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    Parameter& p = *entries[k].second;
    Tensor& vel = velocity_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i] + options_.weight_decay * p.value[i];
      vel[i] = options_.momentum * vel[i] + g;
      p.value[i] -= options_.lr * vel[i];
    }
  }
}

}  // namespace dummynet::nn
