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

// Reference kernels. Kept deliberately plain: these define the semantics the
// SIMD variants are tested against.

#include <cmath>
#include <cstring>

#include "xv/core/kernels.hpp"

namespace xv::kern::scalar {

void gemm_nn(int M, int N, int K, const float* A, int lda, const float* B,
             int ldb, float* C, int ldc, bool accumulate) {
  for (int m = 0; m < M; ++m) {
    float* c = C + static_cast<int64_t>(m) * ldc;
    if (!accumulate) std::memset(c, 0, sizeof(float) * static_cast<size_t>(N));
    const float* a = A + static_cast<int64_t>(m) * lda;
    for (int k = 0; k < K; ++k) {
      const float av = a[k];
      if (av == 0.0f) continue;
      const float* b = B + static_cast<int64_t>(k) * ldb;
      for (int n = 0; n < N; ++n) c[n] += av * b[n];
    }
  }
}

void gemm_nt(int M, int N, int K, const float* A, int lda, const float* B,
             int ldb, float* C, int ldc, bool accumulate) {
  for (int m = 0; m < M; ++m) {
    const float* a = A + static_cast<int64_t>(m) * lda;
    float* c = C + static_cast<int64_t>(m) * ldc;
    for (int n = 0; n < N; ++n) {
      const float* b = B + static_cast<int64_t>(n) * ldb;
      float acc = 0.0f;
      for (int k = 0; k < K; ++k) acc += a[k] * b[k];
      c[n] = accumulate ? c[n] + acc : acc;
    }
  }
}

void gemm_tn(int M, int N, int K, const float* A, int lda, const float* B,
             int ldb, float* C, int ldc, bool accumulate) {
  for (int m = 0; m < M; ++m) {
    float* c = C + static_cast<int64_t>(m) * ldc;
    if (!accumulate) std::memset(c, 0, sizeof(float) * static_cast<size_t>(N));
    for (int k = 0; k < K; ++k) {
      const float av = A[static_cast<int64_t>(k) * lda + m];
      if (av == 0.0f) continue;
      const float* b = B + static_cast<int64_t>(k) * ldb;
      for (int n = 0; n < N; ++n) c[n] += av * b[n];
    }
  }
}

void axpy(int64_t n, float a, const float* x, float* y) {
  for (int64_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double reduce_sum(int64_t n, const float* x) {
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double reduce_abs_diff(int64_t n, const float* x, const float* y) {
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) acc += std::fabs(static_cast<double>(x[i]) - y[i]);
  return acc;
}

double reduce_sq_diff(int64_t n, const float* x, const float* y) {
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(x[i]) - y[i];
    acc += d * d;
  }
  return acc;
}

void adam_step(int64_t n, float* p, const float* g, float* m, float* v,
               float lr, float beta1, float beta2, float eps, float bc1,
               float bc2) {
  for (int64_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0f - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0f - beta2) * g[i] * g[i];
    const float mhat = m[i] / bc1;
    const float vhat = v[i] / bc2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace xv::kern::scalar
