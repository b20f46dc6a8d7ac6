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

#include "dummynet/nn/module.hpp"

#include <cmath>

#include "dummynet/core/error.hpp"

namespace dummynet::nn {

Tensor Tape::pop() {
  if (stack_.empty()) throw Error(ErrorCode::ShapeMismatch, "tape underflow: backward without forward");
  Tensor t = std::move(stack_.back());
  stack_.pop_back();
  return t;
}

void Tape::push_shape(const Shape& s) {
  Tensor t(1, 4, 1, 1);
  t[0] = s.n;
  t[1] = s.c;
  t[2] = s.h;
  t[3] = s.w;
  stack_.push_back(std::move(t));
}

Shape Tape::pop_shape() {
  const Tensor t = pop();
  if (t.size() != 4) throw Error(ErrorCode::ShapeMismatch, "tape order violated: expected a shape record");
  return Shape{static_cast<int>(t[0]), static_cast<int>(t[1]), static_cast<int>(t[2]), static_cast<int>(t[3])};
}

void ParameterSet::zero_grad() {
  for (auto& [name, p] : entries_) p->zero_grad();
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, p] : entries_) n += p->value.size();
  return n;
}

void ParameterSet::save_to(Archive& ar, const std::string& prefix) const {
  for (const auto& [name, p] : entries_) ar.put(prefix + name, p->value);
}

void ParameterSet::load_from(const Archive& ar, const std::string& prefix) {
  for (auto& [name, p] : entries_) {
    const Tensor& t = ar.get(prefix + name);
    if (t.shape() != p->value.shape())
      throw Error(ErrorCode::FormatError, "parameter " + name + " has shape " + t.shape().str() +
                                              ", expected " + p->value.shape().str());
    p->value = t;
  }
}

void ParameterSet::copy_values_from(const ParameterSet& other) {
  if (other.entries_.size() != entries_.size())
    throw Error(ErrorCode::ShapeMismatch, "parameter sets differ in size");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].second->value.shape() != other.entries_[i].second->value.shape())
      throw Error(ErrorCode::ShapeMismatch, "parameter " + entries_[i].first + " shape differs");
    entries_[i].second->value = other.entries_[i].second->value;
  }
}

bool ParameterSet::grads_finite() const {
  for (const auto& [name, p] : entries_)
    if (!all_finite(p->grad)) return false;
  return true;
}

Tensor Sequential::forward(const Tensor& x, Tape* tape) const {
  Tensor h = x;
  for (const auto& layer : layers_) h = layer->forward(h, tape);
  return h;
}

Tensor Sequential::backward(const Tensor& dy, Tape& tape) {
  Tensor g = dy;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g, tape);
  return g;
}

void Sequential::register_parameters(ParameterSet& set, const std::string& prefix) {
  for (std::size_t i = 0; i < layers_.size(); ++i)
    layers_[i]->register_parameters(set, prefix + std::to_string(i) + ".");
}

Tensor Sequential::forward_taps(const Tensor& x, Tape* tape, std::vector<Tensor>& taps) const {
  taps.clear();
  Tensor h = x;
  std::size_t next_tap = 0;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i]->forward(h, tape);
    if (next_tap < taps_.size() && taps_[next_tap] == static_cast<int>(i)) {
      taps.push_back(h);
      ++next_tap;
    }
  }
  return h;
}

Tensor Sequential::backward_taps(const Tensor& dy, const std::vector<Tensor>& tap_grads, Tape& tape) {
  if (tap_grads.size() != taps_.size())
    throw Error(ErrorCode::ShapeMismatch, "tap gradient count mismatch");
  Tensor g = dy;
  int next_tap = static_cast<int>(taps_.size()) - 1;
  for (int i = static_cast<int>(layers_.size()) - 1; i >= 0; --i) {
    if (next_tap >= 0 && taps_[next_tap] == i) {
      if (!tap_grads[next_tap].empty()) add_inplace(g, tap_grads[next_tap]);
      --next_tap;
    }
    g = layers_[i]->backward(g, tape);
  }
  return g;
}

}  // namespace dummynet::nn
