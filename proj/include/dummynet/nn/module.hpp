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

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dummynet/core/archive.hpp"
#include "dummynet/core/tensor.hpp"

namespace dummynet::nn {

struct Parameter {
  Tensor value;
  Tensor grad;

  explicit Parameter(Shape shape = {}) : value(shape), grad(shape) {}
  void zero_grad() { grad.fill(0.0); }
};

/// LIFO store of tensors saved by forward passes for the matching backward.
/// Backward must visit layers in exactly the reverse order of forward.
/// A tape created with `param_grads = false` runs backward for the input
/// gradient only and leaves parameter gradients untouched (frozen networks).
class Tape {
 public:
  explicit Tape(bool param_grads = true) : param_grads_(param_grads) {}

  void push(Tensor t) { stack_.push_back(std::move(t)); }
  Tensor pop();
  void push_shape(const Shape& s);
  Shape pop_shape();
  bool empty() const { return stack_.empty(); }
  std::size_t size() const { return stack_.size(); }
  bool param_grads() const { return param_grads_; }

 private:
  std::vector<Tensor> stack_;
  bool param_grads_;
};

/// Ordered, named view of parameters owned by layers.
class ParameterSet {
 public:
  void add(const std::string& name, Parameter& p) { entries_.emplace_back(name, &p); }
  void zero_grad();
  std::size_t scalar_count() const;
  std::size_t size() const { return entries_.size(); }
  const std::vector<std::pair<std::string, Parameter*>>& entries() const { return entries_; }

  void save_to(Archive& ar, const std::string& prefix = "") const;
  /// Throws FormatError on a missing name or mismatched shape.
  void load_from(const Archive& ar, const std::string& prefix = "");
  /// Copies values from another set with identical names and shapes.
  void copy_values_from(const ParameterSet& other);
  bool grads_finite() const;

 private:
  std::vector<std::pair<std::string, Parameter*>> entries_;
};

class Layer {
 public:
  virtual ~Layer() = default;
  /// Pure when `tape` is null; otherwise saves what backward needs.
  virtual Tensor forward(const Tensor& x, Tape* tape) const = 0;
  /// Returns dL/dx and accumulates dL/dparams (if the tape allows).
  virtual Tensor backward(const Tensor& dy, Tape& tape) = 0;
  virtual void register_parameters(ParameterSet& set, const std::string& prefix) {}
};

/// Chain of layers. Outputs of selected layers can be exposed as taps, and
/// gradients for those taps injected during backward.
class Sequential : public Layer {
 public:
  template <class L, class... Args>
  L& add(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }
  /// Marks the output of the most recently added layer as a tap.
  void tap() { taps_.push_back(static_cast<int>(layers_.size()) - 1); }
  std::size_t tap_count() const { return taps_.size(); }
  std::size_t layer_count() const { return layers_.size(); }

  Tensor forward(const Tensor& x, Tape* tape) const override;
  Tensor backward(const Tensor& dy, Tape& tape) override;
  void register_parameters(ParameterSet& set, const std::string& prefix) override;

  /// Forward that also returns the tap outputs in order.
  Tensor forward_taps(const Tensor& x, Tape* tape, std::vector<Tensor>& taps) const;
  /// Backward with extra gradients for each tap (empty tensor = none).
  /// `dy` must have the output shape; pass zeros when only taps matter.
  Tensor backward_taps(const Tensor& dy, const std::vector<Tensor>& tap_grads, Tape& tape);

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
  std::vector<int> taps_;
};

}  // namespace dummynet::nn
