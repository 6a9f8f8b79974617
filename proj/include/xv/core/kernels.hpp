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

#pragma once

#include <cstdint>
#include <string>

namespace xv::kern {

// Inner-loop kernels behind everything numeric: three GEMM forms feeding the
// convolution lowering, plus elementwise/reduction helpers. Each has a scalar
// reference implementation and an AVX2 variant; the front functions dispatch
// at runtime. Variants may differ in the last float bits (reassociation), so
// equivalence tests compare with a tolerance, but each variant is itself
// deterministic.

enum class Backend { kScalar, kAvx2 };

bool avx2_supported();
Backend active_backend();
// Returns false if the requested backend is unavailable on this machine.
bool set_backend(Backend b);
std::string backend_name(Backend b);

// C[M x N] (+)= A[M x K] * B[K x N]; row-major, ld* are row strides.
void gemm_nn(int M, int N, int K, const float* A, int lda, const float* B,
             int ldb, float* C, int ldc, bool accumulate);
// C[M x N] (+)= A[M x K] * B[N x K]^T.
void gemm_nt(int M, int N, int K, const float* A, int lda, const float* B,
             int ldb, float* C, int ldc, bool accumulate);
// C[M x N] (+)= A[K x M]^T * B[K x N].
void gemm_tn(int M, int N, int K, const float* A, int lda, const float* B,
             int ldb, float* C, int ldc, bool accumulate);

// y += a * x
void axpy(int64_t n, float a, const float* x, float* y);
// Reductions accumulate in double.
double reduce_sum(int64_t n, const float* x);
double reduce_abs_diff(int64_t n, const float* x, const float* y);
double reduce_sq_diff(int64_t n, const float* x, const float* y);
// One Adam update over a parameter slab; bc1/bc2 are the bias corrections
// 1-beta1^t and 1-beta2^t.
void adam_step(int64_t n, float* p, const float* g, float* m, float* v,
               float lr, float beta1, float beta2, float eps, float bc1,
               float bc2);

namespace scalar {
void gemm_nn(int M, int N, int K, const float* A, int lda, const float* B,
             int ldb, float* C, int ldc, bool accumulate);
void gemm_nt(int M, int N, int K, const float* A, int lda, const float* B,
             int ldb, float* C, int ldc, bool accumulate);
void gemm_tn(int M, int N, int K, const float* A, int lda, const float* B,
             int ldb, float* C, int ldc, bool accumulate);
void axpy(int64_t n, float a, const float* x, float* y);
double reduce_sum(int64_t n, const float* x);
double reduce_abs_diff(int64_t n, const float* x, const float* y);
double reduce_sq_diff(int64_t n, const float* x, const float* y);
void adam_step(int64_t n, float* p, const float* g, float* m, float* v,
               float lr, float beta1, float beta2, float eps, float bc1,
               float bc2);
}  // namespace scalar

#if defined(XV_HAVE_AVX2_BUILD)
namespace avx2 {
void gemm_nn(int M, int N, int K, const float* A, int lda, const float* B,
             int ldb, float* C, int ldc, bool accumulate);
void gemm_nt(int M, int N, int K, const float* A, int lda, const float* B,
             int ldb, float* C, int ldc, bool accumulate);
void gemm_tn(int M, int N, int K, const float* A, int lda, const float* B,
             int ldb, float* C, int ldc, bool accumulate);
void axpy(int64_t n, float a, const float* x, float* y);
double reduce_sum(int64_t n, const float* x);
double reduce_abs_diff(int64_t n, const float* x, const float* y);
double reduce_sq_diff(int64_t n, const float* x, const float* y);
void adam_step(int64_t n, float* p, const float* g, float* m, float* v,
               float lr, float beta1, float beta2, float eps, float bc1,
               float bc2);
}  // namespace avx2
#endif

}  // namespace xv::kern
