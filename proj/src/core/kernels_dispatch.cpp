// Copyright 2026 The crossview Authors.
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

#include <cstdlib>
#include <cstring>

#include "xv/core/kernels.hpp"
#include "xv/core/parallel.hpp"

namespace xv::kern {

namespace {

Backend pick_initial_backend() {
  const char* env = std::getenv("XV_BACKEND");
  if (env != nullptr) {
    if (std::strcmp(env, "scalar") == 0) return Backend::kScalar;
    if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return Backend::kAvx2;
  }
  return avx2_supported() ? Backend::kAvx2 : Backend::kScalar;
}

Backend g_backend = pick_initial_backend();

// GEMMs parallelize over rows of C; each thread owns a disjoint row slice.
constexpr int64_t kGemmGrain = 8;
constexpr int64_t kElemGrain = 1 << 14;

}  // namespace

bool avx2_supported() {
#if defined(XV_HAVE_AVX2_BUILD)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend active_backend() { return g_backend; }

bool set_backend(Backend b) {
  if (b == Backend::kAvx2 && !avx2_supported()) return false;
  g_backend = b;
  return true;
}

std::string backend_name(Backend b) {
  return b == Backend::kAvx2 ? "avx2" : "scalar";
}

#if defined(XV_HAVE_AVX2_BUILD)
#define XV_PICK(fn) (g_backend == Backend::kAvx2 ? avx2::fn : scalar::fn)
#else
#define XV_PICK(fn) (scalar::fn)
#endif

void gemm_nn(int M, int N, int K, const float* A, int lda, const float* B,
             int ldb, float* C, int ldc, bool accumulate) {
  auto* impl = XV_PICK(gemm_nn);
  if (static_cast<int64_t>(M) * N * K < (1 << 16)) {
    impl(M, N, K, A, lda, B, ldb, C, ldc, accumulate);
    return;
  }
  parallel_for(0, M, kGemmGrain, [&](int64_t m0, int64_t m1) {
    impl(static_cast<int>(m1 - m0), N, K, A + m0 * lda, lda, B, ldb,
         C + m0 * ldc, ldc, accumulate);
  });
}

void gemm_nt(int M, int N, int K, const float* A, int lda, const float* B,
             int ldb, float* C, int ldc, bool accumulate) {
  auto* impl = XV_PICK(gemm_nt);
  if (static_cast<int64_t>(M) * N * K < (1 << 16)) {
    impl(M, N, K, A, lda, B, ldb, C, ldc, accumulate);
    return;
  }
  parallel_for(0, M, kGemmGrain, [&](int64_t m0, int64_t m1) {
    impl(static_cast<int>(m1 - m0), N, K, A + m0 * lda, lda, B, ldb,
         C + m0 * ldc, ldc, accumulate);
  });
}

void gemm_tn(int M, int N, int K, const float* A, int lda, const float* B,
             int ldb, float* C, int ldc, bool accumulate) {
  auto* impl = XV_PICK(gemm_tn);
  if (static_cast<int64_t>(M) * N * K < (1 << 16)) {
    impl(M, N, K, A, lda, B, ldb, C, ldc, accumulate);
    return;
  }
  // A is indexed [k][m]; slicing m keeps row ownership disjoint.
  parallel_for(0, M, kGemmGrain, [&](int64_t m0, int64_t m1) {
    impl(static_cast<int>(m1 - m0), N, K, A + m0, lda, B, ldb, C + m0 * ldc,
         ldc, accumulate);
  });
}

void axpy(int64_t n, float a, const float* x, float* y) {
  auto* impl = XV_PICK(axpy);
  parallel_for(0, n, kElemGrain,
               [&](int64_t b, int64_t e) { impl(e - b, a, x + b, y + b); });
}

double reduce_sum(int64_t n, const float* x) { return XV_PICK(reduce_sum)(n, x); }

double reduce_abs_diff(int64_t n, const float* x, const float* y) {
  return XV_PICK(reduce_abs_diff)(n, x, y);
}

double reduce_sq_diff(int64_t n, const float* x, const float* y) {
  return XV_PICK(reduce_sq_diff)(n, x, y);
}

void adam_step(int64_t n, float* p, const float* g, float* m, float* v,
               float lr, float beta1, float beta2, float eps, float bc1,
               float bc2) {
  auto* impl = XV_PICK(adam_step);
  parallel_for(0, n, kElemGrain, [&](int64_t b, int64_t e) {
    impl(e - b, p + b, g + b, m + b, v + b, lr, beta1, beta2, eps, bc1, bc2);
  });
}

#undef XV_PICK

}  // namespace xv::kern
