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

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernels_internal.hpp"

namespace dummynet::simd {
namespace {

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(DUMMYNET_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::avx512:
#if defined(DUMMYNET_HAVE_AVX512) && (defined(__x86_64__) || defined(__i386__))
      return __builtin_cpu_supports("avx512f");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* table_ptr(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &detail::scalar_table();
    case Isa::avx2:
#if defined(DUMMYNET_HAVE_AVX2)
      return &detail::avx2_table();
#else
      return nullptr;
#endif
    case Isa::avx512:
#if defined(DUMMYNET_HAVE_AVX512)
      return &detail::avx512_table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

Isa initial_isa() {
  if (const char* env = std::getenv("DUMMYNET_SIMD")) {
    const Isa wanted = parse_isa(env);
    if (cpu_supports(wanted)) return wanted;
  }
  return detected_isa();
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{table_ptr(initial_isa())};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::avx512: return "avx512";
  }
  return "unknown";
}

Isa parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::scalar;
  if (name == "avx2") return Isa::avx2;
  if (name == "avx512") return Isa::avx512;
  if (name == "auto") return detected_isa();
  throw std::invalid_argument("unknown instruction set: " + std::string(name));
}

Isa detected_isa() {
  if (cpu_supports(Isa::avx512)) return Isa::avx512;
  if (cpu_supports(Isa::avx2)) return Isa::avx2;
  return Isa::scalar;
}

Isa active_isa() { return active_slot().load()->isa; }

void set_active_isa(Isa isa) {
  if (!cpu_supports(isa))
    throw std::invalid_argument("instruction set not available: " + std::string(isa_name(isa)));
  active_slot().store(table_ptr(isa));
}

const KernelTable& kernels_for(Isa isa) {
  const KernelTable* t = table_ptr(isa);
  if (t == nullptr || !cpu_supports(isa))
    throw std::invalid_argument("instruction set not available: " + std::string(isa_name(isa)));
  return *t;
}

const KernelTable& kernels() { return *active_slot().load(std::memory_order_relaxed); }

void gemm_nt(int m, int n, int k, const double* a, int lda, const double* b,
             int ldb, double* c, int ldc, bool accumulate) {
  const KernelTable& t = kernels();
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::ptrdiff_t>(i) * lda;
    double* crow = c + static_cast<std::ptrdiff_t>(i) * ldc;
    for (int j = 0; j < n; ++j) {
      const double v = t.dot(arow, b + static_cast<std::ptrdiff_t>(j) * ldb, static_cast<std::size_t>(k));
      crow[j] = accumulate ? crow[j] + v : v;
    }
  }
}

void gemm_tn(int m, int n, int k, const double* a, int lda, const double* b,
             int ldb, double* c, int ldc, bool accumulate) {
  thread_local std::vector<double> at;
  at.resize(static_cast<std::size_t>(m) * k);
  for (int p = 0; p < k; ++p)
    for (int i = 0; i < m; ++i) at[static_cast<std::size_t>(i) * k + p] = a[static_cast<std::ptrdiff_t>(p) * lda + i];
  kernels().gemm(m, n, k, at.data(), k, b, ldb, c, ldc, accumulate);
}

}  // namespace dummynet::simd
