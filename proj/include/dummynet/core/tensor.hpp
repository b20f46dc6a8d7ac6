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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dummynet {

/// NCHW extent. Vectors are stored as (n, c, 1, 1).
struct Shape {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::size_t sample_size() const { return static_cast<std::size_t>(c) * h * w; }
  std::size_t plane_size() const { return static_cast<std::size_t>(h) * w; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

/// Dense row-major NCHW tensor of doubles with value semantics.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(int n, int c, int h, int w, double fill = 0.0)
      : Tensor(Shape{n, c, h, w}, fill) {}

  const Shape& shape() const { return shape_; }
  int n() const { return shape_.n; }
  int c() const { return shape_.c; }
  int h() const { return shape_.h; }
  int w() const { return shape_.w; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }
  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double& operator()(int n, int c, int y, int x) {
    return data_[index(n, c, y, x)];
  }
  double operator()(int n, int c, int y, int x) const {
    return data_[index(n, c, y, x)];
  }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* sample(int n) { return data_.data() + n * shape_.sample_size(); }
  const double* sample(int n) const { return data_.data() + n * shape_.sample_size(); }
  double* plane(int n, int c) {
    return data_.data() + (static_cast<std::size_t>(n) * shape_.c + c) * shape_.plane_size();
  }
  const double* plane(int n, int c) const {
    return data_.data() + (static_cast<std::size_t>(n) * shape_.c + c) * shape_.plane_size();
  }

  void fill(double v);
  /// Same data, new extent of equal size.
  Tensor reshaped(Shape shape) const;
  /// Copy of samples [begin, begin + count).
  Tensor batch_slice(int begin, int count) const;
  /// Copy of sample n as a batch of one.
  Tensor sample_tensor(int n) const { return batch_slice(n, 1); }

 private:
  std::size_t index(int n, int c, int y, int x) const {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }

  Shape shape_{};
  std::vector<double> data_;
};

// Free helpers used across modules.

/// Stacks equally shaped batches along n.
Tensor concat_batch(std::span<const Tensor> parts);
/// Concatenates along channels; all parts share n, h, w.
Tensor concat_channels(std::span<const Tensor> parts);
/// Channels [begin, begin + count) of every sample.
Tensor slice_channels(const Tensor& t, int begin, int count);

void add_inplace(Tensor& y, const Tensor& x, double alpha = 1.0);
void scale_inplace(Tensor& t, double s);
double sum(const Tensor& t);
double mean(const Tensor& t);
double max_abs(const Tensor& t);
double max_abs_diff(const Tensor& a, const Tensor& b);
double mean_abs_diff(const Tensor& a, const Tensor& b);
bool all_finite(const Tensor& t);

}  // namespace dummynet
