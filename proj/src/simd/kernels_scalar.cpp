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

// Reference kernels. Every vector variant is tested against these.

#include <algorithm>

#include "kernels_internal.hpp"

namespace dummynet::simd::detail {
namespace {

void gemm_scalar(int m, int n, int k, const double* a, int lda, const double* b,
                 int ldb, double* c, int ldc, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    double* crow = c + static_cast<std::ptrdiff_t>(i) * ldc;
    if (!accumulate) std::fill(crow, crow + n, 0.0);
    const double* arow = a + static_cast<std::ptrdiff_t>(i) * lda;
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = b + static_cast<std::ptrdiff_t>(p) * ldb;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void blend_scalar(const double* mask, const double* fg, const double* bg,
                  double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double m = mask[i];
    const double v = m * fg[i] + (1.0 - m) * bg[i];
    const double lo = std::min(fg[i], bg[i]);
    const double hi = std::max(fg[i], bg[i]);
    out[i] = std::min(std::max(v, lo), hi);
  }
}

void mul_scalar(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= x[i];
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::scalar, gemm_scalar, dot_scalar,
                                 axpy_scalar, blend_scalar, mul_scalar};
  return table;
}

}  // namespace dummynet::simd::detail
