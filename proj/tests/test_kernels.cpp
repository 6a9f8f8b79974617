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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "xv/core/kernels.hpp"
#include "xv/core/rng.hpp"

using namespace xv;

namespace {

std::vector<float> random_vec(int64_t n, uint64_t seed, float scale = 1.0f) {
  Rng rng(seed);
  std::vector<float> v(static_cast<size_t>(n));
  for (auto& x : v) x = static_cast<float>(rng.gaussian(0.0, scale));
  return v;
}

// Plain triple loop, the definitional oracle both variants must match.
void naive_gemm(char mode, int M, int N, int K, const float* A, int lda,
                const float* B, int ldb, std::vector<double>& C) {
  C.assign(static_cast<size_t>(M) * N, 0.0);
  for (int m = 0; m < M; ++m) {
    for (int n = 0; n < N; ++n) {
      double acc = 0.0;
      for (int k = 0; k < K; ++k) {
        double a, b;
        if (mode == 'n') {
          a = A[static_cast<int64_t>(m) * lda + k];
          b = B[static_cast<int64_t>(k) * ldb + n];
        } else if (mode == 't') {  // A transposed
          a = A[static_cast<int64_t>(k) * lda + m];
          b = B[static_cast<int64_t>(k) * ldb + n];
        } else {  // B transposed
          a = A[static_cast<int64_t>(m) * lda + k];
          b = B[static_cast<int64_t>(n) * ldb + k];
        }
        acc += a * b;
      }
      C[static_cast<size_t>(m) * N + n] = acc;
    }
  }
}

void check_close(const std::vector<float>& got, const std::vector<double>& want,
                 double tol) {
  REQUIRE(got.size() == want.size());
  for (size_t i = 0; i < got.size(); ++i) {
    const double scale = std::max(1.0, std::fabs(want[i]));
    CHECK(std::fabs(got[i] - want[i]) <= tol * scale);
  }
}

}  // namespace

TEST_CASE("gemm variants match the naive oracle") {
  struct Case {
    int m, n, k;
  };
  for (const Case c : {Case{1, 1, 1}, Case{3, 5, 7}, Case{17, 33, 9},
                       Case{64, 130, 48}, Case{2, 256, 512}}) {
    const auto A = random_vec(static_cast<int64_t>(c.m) * c.k, 1);
    const auto B = random_vec(static_cast<int64_t>(c.k) * c.n, 2);
    const auto At = random_vec(static_cast<int64_t>(c.k) * c.m, 3);
    const auto Bt = random_vec(static_cast<int64_t>(c.n) * c.k, 4);
    std::vector<double> want;
    std::vector<float> got(static_cast<size_t>(c.m) * c.n);

    naive_gemm('n', c.m, c.n, c.k, A.data(), c.k, B.data(), c.n, want);
    kern::scalar::gemm_nn(c.m, c.n, c.k, A.data(), c.k, B.data(), c.n, got.data(), c.n, false);
    check_close(got, want, 1e-4);

    naive_gemm('t', c.m, c.n, c.k, At.data(), c.m, B.data(), c.n, want);
    kern::scalar::gemm_tn(c.m, c.n, c.k, At.data(), c.m, B.data(), c.n, got.data(), c.n, false);
    check_close(got, want, 1e-4);

    naive_gemm('b', c.m, c.n, c.k, A.data(), c.k, Bt.data(), c.k, want);
    kern::scalar::gemm_nt(c.m, c.n, c.k, A.data(), c.k, Bt.data(), c.k, got.data(), c.n, false);
    check_close(got, want, 1e-4);
  }
}

#if defined(XV_HAVE_AVX2_BUILD)
TEST_CASE("avx2 gemm variants agree with the scalar reference") {
  if (!kern::avx2_supported()) return;
  struct Case {
    int m, n, k;
  };
  for (const Case c : {Case{1, 7, 3}, Case{5, 24, 16}, Case{13, 129, 65},
                       Case{64, 1024, 48}, Case{31, 250, 512}}) {
    const auto A = random_vec(static_cast<int64_t>(c.m) * c.k, 11);
    const auto B = random_vec(static_cast<int64_t>(c.k) * c.n, 12);
    const auto At = random_vec(static_cast<int64_t>(c.k) * c.m, 13);
    const auto Bt = random_vec(static_cast<int64_t>(c.n) * c.k, 14);
    const auto Cinit = random_vec(static_cast<int64_t>(c.m) * c.n, 15);

    for (bool acc : {false, true}) {
      std::vector<float> cs = Cinit, cv = Cinit;
      kern::scalar::gemm_nn(c.m, c.n, c.k, A.data(), c.k, B.data(), c.n, cs.data(), c.n, acc);
      kern::avx2::gemm_nn(c.m, c.n, c.k, A.data(), c.k, B.data(), c.n, cv.data(), c.n, acc);
      for (size_t i = 0; i < cs.size(); ++i) {
        CHECK(std::fabs(cs[i] - cv[i]) <= 1e-4 * std::max(1.0f, std::fabs(cs[i])));
      }

      cs = Cinit;
      cv = Cinit;
      kern::scalar::gemm_tn(c.m, c.n, c.k, At.data(), c.m, B.data(), c.n, cs.data(), c.n, acc);
      kern::avx2::gemm_tn(c.m, c.n, c.k, At.data(), c.m, B.data(), c.n, cv.data(), c.n, acc);
      for (size_t i = 0; i < cs.size(); ++i) {
        CHECK(std::fabs(cs[i] - cv[i]) <= 1e-4 * std::max(1.0f, std::fabs(cs[i])));
      }

      cs = Cinit;
      cv = Cinit;
      kern::scalar::gemm_nt(c.m, c.n, c.k, A.data(), c.k, Bt.data(), c.k, cs.data(), c.n, acc);
      kern::avx2::gemm_nt(c.m, c.n, c.k, A.data(), c.k, Bt.data(), c.k, cv.data(), c.n, acc);
      for (size_t i = 0; i < cs.size(); ++i) {
        CHECK(std::fabs(cs[i] - cv[i]) <= 1e-4 * std::max(1.0f, std::fabs(cs[i])));
      }
    }
  }
}

TEST_CASE("avx2 elementwise kernels agree with scalar") {
  if (!kern::avx2_supported()) return;
  const int64_t n = 4099;  // odd tail exercises the remainder loops
  const auto x = random_vec(n, 21);
  const auto y0 = random_vec(n, 22);

  std::vector<float> ys = y0, yv = y0;
  kern::scalar::axpy(n, 0.37f, x.data(), ys.data());
  kern::avx2::axpy(n, 0.37f, x.data(), yv.data());
  for (int64_t i = 0; i < n; ++i) CHECK(ys[i] == doctest::Approx(yv[i]).epsilon(1e-6));

  CHECK(kern::scalar::reduce_sum(n, x.data()) ==
        doctest::Approx(kern::avx2::reduce_sum(n, x.data())).epsilon(1e-10));
  CHECK(kern::scalar::reduce_abs_diff(n, x.data(), y0.data()) ==
        doctest::Approx(kern::avx2::reduce_abs_diff(n, x.data(), y0.data())).epsilon(1e-10));
  CHECK(kern::scalar::reduce_sq_diff(n, x.data(), y0.data()) ==
        doctest::Approx(kern::avx2::reduce_sq_diff(n, x.data(), y0.data())).epsilon(1e-10));
}

TEST_CASE("avx2 adam step agrees with scalar") {
  if (!kern::avx2_supported()) return;
  const int64_t n = 1027;
  auto p1 = random_vec(n, 31);
  auto p2 = p1;
  const auto g = random_vec(n, 32);
  auto m1 = random_vec(n, 33, 0.01f);
  auto m2 = m1;
  auto v1 = random_vec(n, 34);
  for (auto& v : v1) v = std::fabs(v) + 0.001f;
  auto v2 = v1;
  kern::scalar::adam_step(n, p1.data(), g.data(), m1.data(), v1.data(), 2e-4f, 0.5f,
                          0.999f, 1e-8f, 0.5f, 0.001f);
  kern::avx2::adam_step(n, p2.data(), g.data(), m2.data(), v2.data(), 2e-4f, 0.5f,
                        0.999f, 1e-8f, 0.5f, 0.001f);
  for (int64_t i = 0; i < n; ++i) {
    CHECK(p1[i] == doctest::Approx(p2[i]).epsilon(1e-5));
    CHECK(m1[i] == doctest::Approx(m2[i]).epsilon(1e-5));
    CHECK(v1[i] == doctest::Approx(v2[i]).epsilon(1e-5));
  }
}
#endif

TEST_CASE("dispatched kernels are deterministic across repeat calls") {
  const int m = 37, n = 211, k = 64;
  const auto A = random_vec(static_cast<int64_t>(m) * k, 41);
  const auto B = random_vec(static_cast<int64_t>(k) * n, 42);
  std::vector<float> c1(static_cast<size_t>(m) * n), c2 = c1;
  kern::gemm_nn(m, n, k, A.data(), k, B.data(), n, c1.data(), n, false);
  kern::gemm_nn(m, n, k, A.data(), k, B.data(), n, c2.data(), n, false);
  CHECK(std::equal(c1.begin(), c1.end(), c2.begin()));
}

TEST_CASE("backend selection reports availability") {
  const kern::Backend before = kern::active_backend();
  CHECK(kern::set_backend(kern::Backend::kScalar));
  CHECK(kern::active_backend() == kern::Backend::kScalar);
  if (kern::avx2_supported()) {
    CHECK(kern::set_backend(kern::Backend::kAvx2));
    CHECK(kern::active_backend() == kern::Backend::kAvx2);
  }
  kern::set_backend(before);
}
