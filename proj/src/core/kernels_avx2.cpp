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

// AVX2/FMA variants. This TU is compiled with -mavx2 -mfma and must only be
// entered after the runtime cpuid check in kernels_dispatch.cpp.

#include <immintrin.h>

#include <cmath>
#include <cstring>

#include "xv/core/kernels.hpp"

namespace xv::kern::avx2 {

namespace {

inline float hsum8(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_hadd_ps(lo, lo);
  lo = _mm_hadd_ps(lo, lo);
  return _mm_cvtss_f32(lo);
}

inline double hsum4d(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

// Broadcast-A FMA over contiguous rows of B; two rows of A at a time keeps
// the accumulator loads/stores per k halved.
inline void gemm_rows_bcast(int M, int N, int K, const float* A, int lda,
                            const float* B, int ldb, float* C, int ldc,
                            bool accumulate, bool a_transposed) {
  for (int m = 0; m + 2 <= M; m += 2) {
    float* c0 = C + static_cast<int64_t>(m) * ldc;
    float* c1 = c0 + ldc;
    if (!accumulate) {
      std::memset(c0, 0, sizeof(float) * static_cast<size_t>(N));
      std::memset(c1, 0, sizeof(float) * static_cast<size_t>(N));
    }
    for (int k = 0; k < K; ++k) {
      const float a0 =
          a_transposed ? A[static_cast<int64_t>(k) * lda + m] : A[static_cast<int64_t>(m) * lda + k];
      const float a1 = a_transposed ? A[static_cast<int64_t>(k) * lda + m + 1]
                                    : A[static_cast<int64_t>(m + 1) * lda + k];
      if (a0 == 0.0f && a1 == 0.0f) continue;
      const float* b = B + static_cast<int64_t>(k) * ldb;
      const __m256 va0 = _mm256_set1_ps(a0);
      const __m256 va1 = _mm256_set1_ps(a1);
      int n = 0;
      for (; n + 16 <= N; n += 16) {
        const __m256 vb0 = _mm256_loadu_ps(b + n);
        const __m256 vb1 = _mm256_loadu_ps(b + n + 8);
        _mm256_storeu_ps(c0 + n, _mm256_fmadd_ps(va0, vb0, _mm256_loadu_ps(c0 + n)));
        _mm256_storeu_ps(c0 + n + 8, _mm256_fmadd_ps(va0, vb1, _mm256_loadu_ps(c0 + n + 8)));
        _mm256_storeu_ps(c1 + n, _mm256_fmadd_ps(va1, vb0, _mm256_loadu_ps(c1 + n)));
        _mm256_storeu_ps(c1 + n + 8, _mm256_fmadd_ps(va1, vb1, _mm256_loadu_ps(c1 + n + 8)));
      }
      for (; n + 8 <= N; n += 8) {
        const __m256 vb = _mm256_loadu_ps(b + n);
        _mm256_storeu_ps(c0 + n, _mm256_fmadd_ps(va0, vb, _mm256_loadu_ps(c0 + n)));
        _mm256_storeu_ps(c1 + n, _mm256_fmadd_ps(va1, vb, _mm256_loadu_ps(c1 + n)));
      }
      for (; n < N; ++n) {
        c0[n] += a0 * b[n];
        c1[n] += a1 * b[n];
      }
    }
  }
  if (M & 1) {
    const int m = M - 1;
    float* c = C + static_cast<int64_t>(m) * ldc;
    if (!accumulate) std::memset(c, 0, sizeof(float) * static_cast<size_t>(N));
    for (int k = 0; k < K; ++k) {
      const float av =
          a_transposed ? A[static_cast<int64_t>(k) * lda + m] : A[static_cast<int64_t>(m) * lda + k];
      if (av == 0.0f) continue;
      const float* b = B + static_cast<int64_t>(k) * ldb;
      const __m256 va = _mm256_set1_ps(av);
      int n = 0;
      for (; n + 8 <= N; n += 8) {
        _mm256_storeu_ps(c + n, _mm256_fmadd_ps(va, _mm256_loadu_ps(b + n),
                                                _mm256_loadu_ps(c + n)));
      }
      for (; n < N; ++n) c[n] += av * b[n];
    }
  }
}

}  // namespace

void gemm_nn(int M, int N, int K, const float* A, int lda, const float* B,
             int ldb, float* C, int ldc, bool accumulate) {
  gemm_rows_bcast(M, N, K, A, lda, B, ldb, C, ldc, accumulate, false);
}

void gemm_tn(int M, int N, int K, const float* A, int lda, const float* B,
             int ldb, float* C, int ldc, bool accumulate) {
  gemm_rows_bcast(M, N, K, A, lda, B, ldb, C, ldc, accumulate, true);
}

void gemm_nt(int M, int N, int K, const float* A, int lda, const float* B,
             int ldb, float* C, int ldc, bool accumulate) {
  for (int m = 0; m < M; ++m) {
    const float* a = A + static_cast<int64_t>(m) * lda;
    float* c = C + static_cast<int64_t>(m) * ldc;
    for (int n = 0; n < N; ++n) {
      const float* b = B + static_cast<int64_t>(n) * ldb;
      __m256 acc0 = _mm256_setzero_ps();
      __m256 acc1 = _mm256_setzero_ps();
      int k = 0;
      for (; k + 16 <= K; k += 16) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + k), _mm256_loadu_ps(b + k), acc0);
        acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + k + 8), _mm256_loadu_ps(b + k + 8), acc1);
      }
      for (; k + 8 <= K; k += 8) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + k), _mm256_loadu_ps(b + k), acc0);
      }
      float acc = hsum8(_mm256_add_ps(acc0, acc1));
      for (; k < K; ++k) acc += a[k] * b[k];
      c[n] = accumulate ? c[n] + acc : acc;
    }
  }
}

void axpy(int64_t n, float a, const float* x, float* y) {
  const __m256 va = _mm256_set1_ps(a);
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i),
                                            _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double reduce_sum(int64_t n, const float* x) {
  __m256d acc = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_cvtps_pd(_mm_loadu_ps(x + i)));
  }
  double s = hsum4d(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double reduce_abs_diff(int64_t n, const float* x, const float* y) {
  const __m256d signmask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_cvtps_pd(_mm_loadu_ps(x + i));
    const __m256d dy = _mm256_cvtps_pd(_mm_loadu_ps(y + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(signmask, _mm256_sub_pd(dx, dy)));
  }
  double s = hsum4d(acc);
  for (; i < n; ++i) s += std::fabs(static_cast<double>(x[i]) - y[i]);
  return s;
}

double reduce_sq_diff(int64_t n, const float* x, const float* y) {
  __m256d acc = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_cvtps_pd(_mm_loadu_ps(x + i)),
                                    _mm256_cvtps_pd(_mm_loadu_ps(y + i)));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum4d(acc);
  for (; i < n; ++i) {
    const double d = static_cast<double>(x[i]) - y[i];
    s += d * d;
  }
  return s;
}

void adam_step(int64_t n, float* p, const float* g, float* m, float* v,
               float lr, float beta1, float beta2, float eps, float bc1,
               float bc2) {
  const __m256 vb1 = _mm256_set1_ps(beta1);
  const __m256 vb2 = _mm256_set1_ps(beta2);
  const __m256 vn1 = _mm256_set1_ps(1.0f - beta1);
  const __m256 vn2 = _mm256_set1_ps(1.0f - beta2);
  const __m256 vlr = _mm256_set1_ps(lr);
  const __m256 veps = _mm256_set1_ps(eps);
  const __m256 vibc1 = _mm256_set1_ps(1.0f / bc1);
  const __m256 vibc2 = _mm256_set1_ps(1.0f / bc2);
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 vg = _mm256_loadu_ps(g + i);
    __m256 vm = _mm256_fmadd_ps(vn1, vg, _mm256_mul_ps(vb1, _mm256_loadu_ps(m + i)));
    __m256 vv = _mm256_fmadd_ps(vn2, _mm256_mul_ps(vg, vg),
                                _mm256_mul_ps(vb2, _mm256_loadu_ps(v + i)));
    _mm256_storeu_ps(m + i, vm);
    _mm256_storeu_ps(v + i, vv);
    const __m256 mhat = _mm256_mul_ps(vm, vibc1);
    const __m256 vhat = _mm256_mul_ps(vv, vibc2);
    const __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(vhat), veps);
    const __m256 upd = _mm256_div_ps(_mm256_mul_ps(vlr, mhat), denom);
    _mm256_storeu_ps(p + i, _mm256_sub_ps(_mm256_loadu_ps(p + i), upd));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0f - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0f - beta2) * g[i] * g[i];
    const float mhat = m[i] / bc1;
    const float vhat = v[i] / bc2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace xv::kern::avx2
