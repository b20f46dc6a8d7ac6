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

// AVX2 + FMA kernels. Compiled with -mavx2 -mfma; only reached after the
// dispatcher has confirmed CPU support.

#include <immintrin.h>

#include <algorithm>

#include "kernels_internal.hpp"

namespace dummynet::simd::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// R rows of C against columns [0, n): 8-wide, then 4-wide, then scalar tail.
template <int R>
void gemm_rows(int n, int k, const double* a, int lda, const double* b, int ldb,
               double* c, int ldc, bool accumulate) {
  int j = 0;
  for (; j + 8 <= n; j += 8) {
    __m256d acc0[R], acc1[R];
    for (int r = 0; r < R; ++r) {
      if (accumulate) {
        acc0[r] = _mm256_loadu_pd(c + r * ldc + j);
        acc1[r] = _mm256_loadu_pd(c + r * ldc + j + 4);
      } else {
        acc0[r] = _mm256_setzero_pd();
        acc1[r] = _mm256_setzero_pd();
      }
    }
    const double* bp = b + j;
    for (int p = 0; p < k; ++p, bp += ldb) {
      const __m256d b0 = _mm256_loadu_pd(bp);
      const __m256d b1 = _mm256_loadu_pd(bp + 4);
      for (int r = 0; r < R; ++r) {
        const __m256d av = _mm256_broadcast_sd(a + r * lda + p);
        acc0[r] = _mm256_fmadd_pd(av, b0, acc0[r]);
        acc1[r] = _mm256_fmadd_pd(av, b1, acc1[r]);
      }
    }
    for (int r = 0; r < R; ++r) {
      _mm256_storeu_pd(c + r * ldc + j, acc0[r]);
      _mm256_storeu_pd(c + r * ldc + j + 4, acc1[r]);
    }
  }
  for (; j + 4 <= n; j += 4) {
    __m256d acc[R];
    for (int r = 0; r < R; ++r)
      acc[r] = accumulate ? _mm256_loadu_pd(c + r * ldc + j) : _mm256_setzero_pd();
    const double* bp = b + j;
    for (int p = 0; p < k; ++p, bp += ldb) {
      const __m256d b0 = _mm256_loadu_pd(bp);
      for (int r = 0; r < R; ++r)
        acc[r] = _mm256_fmadd_pd(_mm256_broadcast_sd(a + r * lda + p), b0, acc[r]);
    }
    for (int r = 0; r < R; ++r) _mm256_storeu_pd(c + r * ldc + j, acc[r]);
  }
  for (; j < n; ++j) {
    for (int r = 0; r < R; ++r) {
      double s = accumulate ? c[r * ldc + j] : 0.0;
      for (int p = 0; p < k; ++p) s += a[r * lda + p] * b[p * ldb + j];
      c[r * ldc + j] = s;
    }
  }
}

void gemm_avx2(int m, int n, int k, const double* a, int lda, const double* b,
               int ldb, double* c, int ldc, bool accumulate) {
  int i = 0;
  for (; i + 4 <= m; i += 4)
    gemm_rows<4>(n, k, a + i * lda, lda, b, ldb, c + i * ldc, ldc, accumulate);
  switch (m - i) {
    case 3: gemm_rows<3>(n, k, a + i * lda, lda, b, ldb, c + i * ldc, ldc, accumulate); break;
    case 2: gemm_rows<2>(n, k, a + i * lda, lda, b, ldb, c + i * ldc, ldc, accumulate); break;
    case 1: gemm_rows<1>(n, k, a + i * lda, lda, b, ldb, c + i * ldc, ldc, accumulate); break;
    default: break;
  }
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4)
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// No FMA here: the result must match the scalar reference bit for bit.
void blend_avx2(const double* mask, const double* fg, const double* bg,
                double* out, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d m = _mm256_loadu_pd(mask + i);
    const __m256d f = _mm256_loadu_pd(fg + i);
    const __m256d g = _mm256_loadu_pd(bg + i);
    const __m256d v = _mm256_add_pd(_mm256_mul_pd(m, f), _mm256_mul_pd(_mm256_sub_pd(one, m), g));
    const __m256d lo = _mm256_min_pd(f, g);
    const __m256d hi = _mm256_max_pd(f, g);
    _mm256_storeu_pd(out + i, _mm256_min_pd(_mm256_max_pd(v, lo), hi));
  }
  for (; i < n; ++i) {
    const double m = mask[i];
    const double v = m * fg[i] + (1.0 - m) * bg[i];
    out[i] = std::min(std::max(v, std::min(fg[i], bg[i])), std::max(fg[i], bg[i]));
  }
}

void mul_avx2(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] *= x[i];
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{Isa::avx2, gemm_avx2, dot_avx2, axpy_avx2,
                                 blend_avx2, mul_avx2};
  return table;
}

}  // namespace dummynet::simd::detail
