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

#include <vector>

#include "dummynet/nn/module.hpp"

namespace dummynet::nn {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(const ParameterSet& params, AdamOptions options);
  /// Applies one update from the accumulated gradients.
  void step();
  void set_lr(double lr) { options_.lr = lr; }
  long steps() const { return t_; }

 private:
  ParameterSet params_;
  AdamOptions options_;
  std::vector<Tensor> m_, v_;
  long t_ = 0;
};

struct SgdOptions {
  double lr = 0.05;
  double momentum = 0.9;
  double weight_decay = 0.0;
};

class Sgd {
 public:
  Sgd(const ParameterSet& params, SgdOptions options);
  void step();
  void set_lr(double lr) { options_.lr = lr; }

 private:
  ParameterSet params_;
  SgdOptions options_;
  std::vector<Tensor> velocity_;
};

}  // namespace dummynet::nn
