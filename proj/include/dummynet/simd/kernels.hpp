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
#include <string_view>

namespace dummynet::simd {

/// Instruction set a kernel table was compiled for.
enum class Isa { scalar, avx2, avx512 };

std::string_view isa_name(Isa isa);

/// Best instruction set supported by the running CPU (and compiled in).
Isa detected_isa();

/// Instruction set currently used by the free functions below.
Isa active_isa();

/// Select the kernel table. Throws std::invalid_argument when the CPU lacks
/// the requested instruction set. The choice is process-wide.
void set_active_isa(Isa isa);

/// Parses "scalar", "avx2", "avx512" (or "auto").
Isa parse_isa(std::string_view name);

struct KernelTable {
  Isa isa;
  // C[m x n] = (accumulate ? C : 0) + A[m x k] * B[k x n]; row-major with
  // leading dimensions.
  void (*gemm)(int m, int n, int k, const double* a, int lda, const double* b,
               int ldb, double* c, int ldc, bool accumulate);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = clamp(m * fg + (1 - m) * bg, min(fg, bg), max(fg, bg))
  void (*blend)(const double* mask, const double* fg, const double* bg,
                double* out, std::size_t n);
  // y *= x (elementwise)
  void (*mul)(const double* x, double* y, std::size_t n);
};

/// Table for a specific instruction set; throws if not compiled in.
const KernelTable& kernels_for(Isa isa);

/// Table for the active instruction set.
const KernelTable& kernels();

inline void gemm(int m, int n, int k, const double* a, int lda, const double* b,
                 int ldb, double* c, int ldc, bool accumulate = false) {
  kernels().gemm(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
}
inline double dot(const double* x, const double* y, std::size_t n) {
  return kernels().dot(x, y, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  kernels().axpy(alpha, x, y, n);
}
inline void blend(const double* mask, const double* fg, const double* bg,
                  double* out, std::size_t n) {
  kernels().blend(mask, fg, bg, out, n);
}
inline void mul(const double* x, double* y, std::size_t n) {
  kernels().mul(x, y, n);
}

/// C[m x n] (+)= A[m x k] * B[n x k]^T via row dot products.
void gemm_nt(int m, int n, int k, const double* a, int lda, const double* b,
             int ldb, double* c, int ldc, bool accumulate = false);

/// C[m x n] (+)= A[k x m]^T * B[k x n].
void gemm_tn(int m, int n, int k, const double* a, int lda, const double* b,
             int ldb, double* c, int ldc, bool accumulate = false);

}  // namespace dummynet::simd
