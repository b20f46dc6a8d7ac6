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

// AVX-512F kernels. Column tails use masked loads instead of scalar loops.

#include <immintrin.h>

#include <algorithm>

#include "kernels_internal.hpp"

namespace dummynet::simd::detail {
namespace {

inline __mmask8 tail_mask(int count) {
  return static_cast<__mmask8>((1u << count) - 1u);
}

template <int R>
void gemm_rows(int n, int k, const double* a, int lda, const double* b, int ldb,
               double* c, int ldc, bool accumulate) {
  int j = 0;
  for (; j + 16 <= n; j += 16) {
    __m512d acc0[R], acc1[R];
    for (int r = 0; r < R; ++r) {
      if (accumulate) {
        acc0[r] = _mm512_loadu_pd(c + r * ldc + j);
        acc1[r] = _mm512_loadu_pd(c + r * ldc + j + 8);
      } else {
        acc0[r] = _mm512_setzero_pd();
        acc1[r] = _mm512_setzero_pd();
      }
    }
    const double* bp = b + j;
    for (int p = 0; p < k; ++p, bp += ldb) {
      const __m512d b0 = _mm512_loadu_pd(bp);
      const __m512d b1 = _mm512_loadu_pd(bp + 8);
      for (int r = 0; r < R; ++r) {
        const __m512d av = _mm512_set1_pd(a[r * lda + p]);
        acc0[r] = _mm512_fmadd_pd(av, b0, acc0[r]);
        acc1[r] = _mm512_fmadd_pd(av, b1, acc1[r]);
      }
    }
    for (int r = 0; r < R; ++r) {
      _mm512_storeu_pd(c + r * ldc + j, acc0[r]);
      _mm512_storeu_pd(c + r * ldc + j + 8, acc1[r]);
    }
  }
  for (; j < n; j += 8) {
    const int width = std::min(8, n - j);
    const __mmask8 mask = tail_mask(width);
    __m512d acc[R];
    for (int r = 0; r < R; ++r)
      acc[r] = accumulate ? _mm512_maskz_loadu_pd(mask, c + r * ldc + j) : _mm512_setzero_pd();
    const double* bp = b + j;
    for (int p = 0; p < k; ++p, bp += ldb) {
      const __m512d b0 = _mm512_maskz_loadu_pd(mask, bp);
      for (int r = 0; r < R; ++r)
        acc[r] = _mm512_fmadd_pd(_mm512_set1_pd(a[r * lda + p]), b0, acc[r]);
    }
    for (int r = 0; r < R; ++r) _mm512_mask_storeu_pd(c + r * ldc + j, mask, acc[r]);
  }
}

void gemm_avx512(int m, int n, int k, const double* a, int lda, const double* b,
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

double dot_avx512(const double* x, const double* y, std::size_t n) {
  __m512d s0 = _mm512_setzero_pd(), s1 = _mm512_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    s0 = _mm512_fmadd_pd(_mm512_loadu_pd(x + i), _mm512_loadu_pd(y + i), s0);
    s1 = _mm512_fmadd_pd(_mm512_loadu_pd(x + i + 8), _mm512_loadu_pd(y + i + 8), s1);
  }
  if (i < n) {
    for (; i < n; i += 8) {
      const __mmask8 mask = tail_mask(static_cast<int>(std::min<std::size_t>(8, n - i)));
      s0 = _mm512_fmadd_pd(_mm512_maskz_loadu_pd(mask, x + i), _mm512_maskz_loadu_pd(mask, y + i), s0);
    }
  }
  return _mm512_reduce_add_pd(_mm512_add_pd(s0, s1));
}

void axpy_avx512(double alpha, const double* x, double* y, std::size_t n) {
  const __m512d va = _mm512_set1_pd(alpha);
  for (std::size_t i = 0; i < n; i += 8) {
    const __mmask8 mask = tail_mask(static_cast<int>(std::min<std::size_t>(8, n - i)));
    const __m512d v = _mm512_fmadd_pd(va, _mm512_maskz_loadu_pd(mask, x + i),
                                      _mm512_maskz_loadu_pd(mask, y + i));
    _mm512_mask_storeu_pd(y + i, mask, v);
  }
}

// No FMA: bit-identical to the scalar reference.
void blend_avx512(const double* mask, const double* fg, const double* bg,
                  double* out, std::size_t n) {
  const __m512d one = _mm512_set1_pd(1.0);
  for (std::size_t i = 0; i < n; i += 8) {
    const __mmask8 k = tail_mask(static_cast<int>(std::min<std::size_t>(8, n - i)));
    const __m512d m = _mm512_maskz_loadu_pd(k, mask + i);
    const __m512d f = _mm512_maskz_loadu_pd(k, fg + i);
    const __m512d g = _mm512_maskz_loadu_pd(k, bg + i);
    const __m512d v = _mm512_add_pd(_mm512_mul_pd(m, f), _mm512_mul_pd(_mm512_sub_pd(one, m), g));
    const __m512d lo = _mm512_min_pd(f, g);
    const __m512d hi = _mm512_max_pd(f, g);
    _mm512_mask_storeu_pd(out + i, k, _mm512_min_pd(_mm512_max_pd(v, lo), hi));
  }
}

void mul_avx512(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; i += 8) {
    const __mmask8 k = tail_mask(static_cast<int>(std::min<std::size_t>(8, n - i)));
    _mm512_mask_storeu_pd(y + i, k, _mm512_mul_pd(_mm512_maskz_loadu_pd(k, x + i),
                                                  _mm512_maskz_loadu_pd(k, y + i)));
  }
}

}  // namespace

const KernelTable& avx512_table() {
  static const KernelTable table{Isa::avx512, gemm_avx512, dot_avx512,
                                 axpy_avx512, blend_avx512, mul_avx512};
  return table;
}

}  // namespace dummynet::simd::detail
