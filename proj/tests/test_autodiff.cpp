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
#include <functional>

#include "xv/nets/autodiff.hpp"

using namespace xv;

namespace {

Tensor random_tensor(std::vector<int> shape, uint64_t seed, double scale = 0.5) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.gaussian(0.0, scale));
  return t;
}

// Reduces the op output to its element sum, then compares the analytic input
// gradient against central differences on sampled entries.
void fd_check(Tensor input, const std::function<ad::Var(const ad::Var&)>& op,
              double h = 1e-2, double tol = 1e-3, int probes = 12) {
  auto value_of = [&](const Tensor& in) {
    ad::Var x = ad::leaf(in, false);
    ad::Var y = op(x);
    double acc = 0.0;
    for (int64_t i = 0; i < y->value.size(); ++i) acc += y->value[i];
    return acc;
  };

  ad::Var x = ad::leaf(input, true);
  ad::Var y = op(x);
  ad::Var s = ad::sum_all(y);
  ad::backward(s);
  REQUIRE(!x->grad.empty());

  Rng pick(555);
  for (int p = 0; p < probes; ++p) {
    const int64_t idx = pick.uniform_int(0, static_cast<int>(input.size() - 1));
    Tensor plus = input, minus = input;
    plus[idx] += static_cast<float>(h);
    minus[idx] -= static_cast<float>(h);
    const double fd = (value_of(plus) - value_of(minus)) / (2.0 * h);
    const double an = x->grad[idx];
    const double err = std::fabs(fd - an) / std::max({1.0, std::fabs(fd), std::fabs(an)});
    CHECK(err <= tol);
  }
}

}  // namespace

TEST_CASE("conv2d gradients match finite differences") {
  fd_check(random_tensor({2, 3, 8, 8}, 1), [](const ad::Var& x) {
    static Tensor wt = random_tensor({4, 3, 4, 4}, 2, 0.3);
    static Tensor bt = random_tensor({4}, 3, 0.1);
    ad::Var w = ad::leaf(wt, false);
    ad::Var b = ad::leaf(bt, false);
    return ad::conv2d(x, w, b, 2, 1);
  });
}

TEST_CASE("conv2d weight gradients match finite differences") {
  const Tensor x0 = random_tensor({1, 3, 8, 8}, 5);
  fd_check(random_tensor({4, 3, 4, 4}, 6, 0.3), [&](const ad::Var& w) {
    ad::Var x = ad::leaf(x0, false);
    ad::Var b = ad::leaf(Tensor({4}, 0.0f), false);
    return ad::conv2d(x, w, b, 2, 1);
  });
}

TEST_CASE("conv_transpose2d gradients match finite differences") {
  fd_check(random_tensor({2, 4, 4, 4}, 7), [](const ad::Var& x) {
    static Tensor wt = random_tensor({4, 3, 4, 4}, 8, 0.3);
    ad::Var w = ad::leaf(wt, false);
    ad::Var b = ad::leaf(Tensor({3}, 0.1f), false);
    return ad::conv_transpose2d(x, w, b, 2, 1);
  });
}

TEST_CASE("conv_transpose2d weight gradients match finite differences") {
  const Tensor x0 = random_tensor({1, 4, 4, 4}, 9);
  fd_check(random_tensor({4, 3, 4, 4}, 10, 0.3), [&](const ad::Var& w) {
    ad::Var x = ad::leaf(x0, false);
    ad::Var b = ad::leaf(Tensor({3}, 0.0f), false);
    return ad::conv_transpose2d(x, w, b, 2, 1);
  });
}

TEST_CASE("batchnorm training-mode gradients match finite differences") {
  fd_check(
      random_tensor({2, 3, 4, 4}, 11),
      [](const ad::Var& x) {
        static Tensor g0 = random_tensor({3}, 12, 0.2);
        Tensor gt = g0;
        for (int i = 0; i < 3; ++i) gt[i] += 1.0f;
        ad::Var g = ad::leaf(gt, false);
        ad::Var b = ad::leaf(Tensor({3}, 0.05f), false);
        static Tensor rm({3}, 0.0f), rv({3}, 1.0f);
        Tensor rm_local = rm, rv_local = rv;
        return ad::batchnorm2d(x, g, b, rm_local, rv_local, true);
      },
      1e-2, 2e-3);
}

TEST_CASE("activation gradients match finite differences") {
  fd_check(random_tensor({2, 2, 3, 3}, 13), [](const ad::Var& x) { return ad::tanh_act(x); });
  fd_check(random_tensor({2, 2, 3, 3}, 14), [](const ad::Var& x) { return ad::sigmoid(x); });
  fd_check(random_tensor({2, 2, 3, 3}, 15, 1.0),
           [](const ad::Var& x) { return ad::leaky_relu(x, 0.2); });
}

TEST_CASE("linear and global_avg_pool gradients match finite differences") {
  fd_check(random_tensor({3, 6}, 16), [](const ad::Var& x) {
    static Tensor wt = random_tensor({4, 6}, 17, 0.4);
    ad::Var w = ad::leaf(wt, false);
    ad::Var b = ad::leaf(Tensor({4}, 0.1f), false);
    return ad::linear(x, w, b);
  });
  fd_check(random_tensor({2, 3, 4, 4}, 18), [](const ad::Var& x) {
    return ad::global_avg_pool(x);
  });
}

TEST_CASE("concat and slice route gradients to the right channels") {
  const Tensor a0 = random_tensor({1, 2, 3, 3}, 19);
  const Tensor b0 = random_tensor({1, 3, 3, 3}, 20);
  ad::Var a = ad::leaf(a0, true);
  ad::Var b = ad::leaf(b0, true);
  ad::Var cat = ad::concat_channels(a, b);
  CHECK(cat->value.dim(1) == 5);
  ad::Var sl = ad::slice_channels(cat, 2, 5);  // exactly the b half
  ad::backward(ad::sum_all(sl));
  REQUIRE(!b->grad.empty());
  for (int64_t i = 0; i < b->grad.size(); ++i) CHECK(b->grad[i] == 1.0f);
  // a is untouched by the slice
  bool a_all_zero = true;
  if (!a->grad.empty()) {
    for (int64_t i = 0; i < a->grad.size(); ++i) a_all_zero &= a->grad[i] == 0.0f;
  }
  CHECK(a_all_zero);
}

TEST_CASE("dropout is deterministic under a fixed rng and scales by 1/(1-p)") {
  const Tensor x0 = random_tensor({1, 4, 8, 8}, 21);
  Rng r1(42), r2(42), r3(43);
  ad::Var y1 = ad::dropout(ad::constant(x0), 0.5, r1, true);
  ad::Var y2 = ad::dropout(ad::constant(x0), 0.5, r2, true);
  ad::Var y3 = ad::dropout(ad::constant(x0), 0.5, r3, true);
  bool same12 = true, same13 = true;
  for (int64_t i = 0; i < x0.size(); ++i) {
    same12 &= y1->value[i] == y2->value[i];
    same13 &= y1->value[i] == y3->value[i];
    const float v = y1->value[i];
    CHECK((v == 0.0f || v == doctest::Approx(2.0f * x0[i])));
  }
  CHECK(same12);
  CHECK(!same13);

  // Inference mode: identity.
  Rng r4(1);
  ad::Var y4 = ad::dropout(ad::constant(x0), 0.5, r4, false);
  for (int64_t i = 0; i < x0.size(); ++i) CHECK(y4->value[i] == x0[i]);
}

TEST_CASE("bce and log losses match closed forms and finite differences") {
  Tensor s({2, 4});
  Rng rng(23);
  for (int64_t i = 0; i < s.size(); ++i) s[i] = static_cast<float>(0.1 + 0.8 * rng.uniform());
  fd_check(
      s, [](const ad::Var& x) { return ad::bce_with_target(x, 0.9); }, 1e-3, 1e-3);
  fd_check(
      s, [](const ad::Var& x) { return ad::neg_mean_log(x); }, 1e-3, 1e-3);

  Tensor t({1, 3});
  t[0] = 0.25f;
  t[1] = 0.5f;
  t[2] = 0.75f;
  const double want = -(std::log(0.25) + std::log(0.5) + std::log(0.75)) / 3.0;
  CHECK(ad::neg_mean_log(ad::constant(t))->value[0] == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("l1_mean handles masks and rejects empty support") {
  const Tensor x0 = random_tensor({2, 3, 4, 4}, 24);
  const Tensor y0 = random_tensor({2, 3, 4, 4}, 25);
  Tensor mask({4, 4}, 0.0f);
  mask.at(1, 2) = 1.0f;
  mask.at(3, 0) = 1.0f;

  double want = 0.0;
  for (int n = 0; n < 2; ++n) {
    for (int c = 0; c < 3; ++c) {
      want += std::fabs(x0.at(n, c, 1, 2) - y0.at(n, c, 1, 2));
      want += std::fabs(x0.at(n, c, 3, 0) - y0.at(n, c, 3, 0));
    }
  }
  want /= 12.0;
  CHECK(ad::l1_mean(ad::constant(x0), ad::constant(y0), &mask)->value[0] ==
        doctest::Approx(want).epsilon(1e-6));

  Tensor empty({4, 4}, 0.0f);
  CHECK_THROWS_AS(ad::l1_mean(ad::constant(x0), ad::constant(y0), &empty), Error);

  fd_check(
      x0,
      [&](const ad::Var& x) { return ad::l1_mean(x, ad::constant(y0), &mask); },
      1e-3, 1e-3, 6);
}

TEST_CASE("softmax cross entropy matches a log-softmax oracle") {
  const Tensor logits = random_tensor({3, 5}, 26, 1.0);
  const std::vector<int> labels = {0, 3, 2};
  double want = 0.0;
  for (int i = 0; i < 3; ++i) {
    double mx = logits.at(i, 0);
    for (int j = 1; j < 5; ++j) mx = std::max(mx, static_cast<double>(logits.at(i, j)));
    double z = 0.0;
    for (int j = 0; j < 5; ++j) z += std::exp(logits.at(i, j) - mx);
    want -= logits.at(i, labels[static_cast<size_t>(i)]) - mx - std::log(z);
  }
  want /= 3.0;
  CHECK(ad::softmax_cross_entropy(ad::constant(logits), labels)->value[0] ==
        doctest::Approx(want).epsilon(1e-5));

  fd_check(
      logits,
      [&](const ad::Var& x) { return ad::softmax_cross_entropy(x, labels); },
      1e-3, 1e-3, 8);
}

TEST_CASE("shared parameters accumulate gradients from every use") {
  const Tensor w0 = random_tensor({2, 2}, 27);
  ad::Var w = ad::leaf(w0, true);
  ad::Var x = ad::constant(random_tensor({3, 2}, 28));
  ad::Var b = ad::constant(Tensor({2}, 0.0f));
  ad::Var y1 = ad::linear(x, w, b);
  ad::Var y2 = ad::linear(x, w, b);  // same parameter used twice
  ad::backward(ad::sum_all(ad::add(y1, y2)));

  ad::Var w_single = ad::leaf(w0, true);
  ad::Var ys = ad::linear(x, w_single, b);
  ad::backward(ad::sum_all(ys));
  for (int64_t i = 0; i < w0.size(); ++i) {
    CHECK(w->grad[i] == doctest::Approx(2.0f * w_single->grad[i]).epsilon(1e-6));
  }
}
