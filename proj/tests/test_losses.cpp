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

#include "xv/losses/losses.hpp"

using namespace xv;
using loss::LossWeights;

namespace {

Tensor filled(std::vector<int> shape, float v) { return Tensor(std::move(shape), v); }

Tensor random_scores(std::vector<int> shape, uint64_t seed) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(0.05 + 0.9 * rng.uniform());
  return t;
}

Tensor random_image(std::vector<int> shape, uint64_t seed) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.uniform() * 2.0 - 1.0);
  return t;
}

// Central-difference check of d(objective)/d(input[idx]) for a scalar-valued
// builder; used for the Eq-style objectives on 8x8 toys.
void fd_objective(Tensor input, const std::function<double(const Tensor&)>& value,
                  const std::function<ad::Var(const ad::Var&)>& graph, double h,
                  double tol, int probes) {
  ad::Var x = ad::leaf(input, true);
  ad::Var total = graph(x);
  ad::backward(total);
  REQUIRE(!x->grad.empty());
  Rng pick(99);
  for (int p = 0; p < probes; ++p) {
    const int64_t idx = pick.uniform_int(0, static_cast<int>(input.size() - 1));
    Tensor plus = input, minus = input;
    plus[idx] += static_cast<float>(h);
    minus[idx] -= static_cast<float>(h);
    const double fd = (value(plus) - value(minus)) / (2.0 * h);
    const double an = x->grad[idx];
    const double err = std::fabs(fd - an) / std::max({1.0, std::fabs(fd), std::fabs(an)});
    CHECK(err <= tol);
  }
}

}  // namespace

TEST_CASE("discriminator loss closed forms") {
  // real = fake = 0.5, smooth 1.0 -> 2 ln 2
  CHECK(loss::adv_loss_d(filled({1, 1, 4, 4}, 0.5f), filled({1, 1, 4, 4}, 0.5f), 1.0) ==
        doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-6));
  // real = 0.9 with smooth 0.9 and fake -> 0: BCE(0.9;0.9)
  const double bce99 = -(0.9 * std::log(0.9) + 0.1 * std::log(0.1));
  CHECK(loss::adv_loss_d(filled({2, 1, 3, 3}, 0.9f), filled({2, 1, 3, 3}, 1e-7f), 0.9) ==
        doctest::Approx(bce99).epsilon(1e-4));
  // perfect discriminator limit
  CHECK(loss::adv_loss_d(filled({1, 1, 2, 2}, 1.0f - 1e-7f), filled({1, 1, 2, 2}, 1e-7f), 1.0) ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-5));
}

TEST_CASE("discriminator loss validates inputs") {
  CHECK_THROWS_AS(loss::adv_loss_d(filled({1, 1, 2, 2}, 1.0f), filled({1, 1, 2, 2}, 0.5f), 0.9),
                  Error);
  CHECK_THROWS_AS(loss::adv_loss_d(filled({1, 1, 2, 2}, 0.5f), filled({1, 1, 2, 2}, 0.0f), 0.9),
                  Error);
  CHECK_THROWS_AS(loss::adv_loss_d(filled({1, 1, 2, 2}, 0.5f), filled({1, 1, 2, 2}, 0.5f), 1.5),
                  Error);
}

TEST_CASE("generator loss closed forms") {
  CHECK(loss::adv_loss_g(filled({1, 1, 4, 4}, 1.0f - 1e-7f)) ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-5));
  CHECK(loss::adv_loss_g(filled({1, 1, 4, 4}, 0.5f)) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-6));
  CHECK(loss::adv_loss_g(filled({3, 1, 2, 2}, static_cast<float>(std::exp(-1.0)))) ==
        doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("l1 loss closed forms and masked oracle") {
  const Tensor x = random_image({2, 3, 8, 8}, 1);
  CHECK(loss::l1_loss(x, x) == doctest::Approx(0.0));
  CHECK(loss::l1_loss(filled({1, 3, 4, 4}, 1.0f), filled({1, 3, 4, 4}, 0.0f)) ==
        doctest::Approx(1.0).epsilon(1e-7));

  const Tensor y = random_image({2, 3, 8, 8}, 2);
  Tensor mask({8, 8}, 0.0f);
  for (int yy = 0; yy < 8; ++yy) {
    for (int xx = 0; xx < 4; ++xx) mask.at(yy, xx) = 1.0f;  // half-frame support
  }
  double acc = 0.0;
  int64_t support = 0;
  for (int n = 0; n < 2; ++n) {
    for (int c = 0; c < 3; ++c) {
      for (int yy = 0; yy < 8; ++yy) {
        for (int xx = 0; xx < 4; ++xx) {
          acc += std::fabs(static_cast<double>(x.at(n, c, yy, xx)) - y.at(n, c, yy, xx));
          ++support;
        }
      }
    }
  }
  CHECK(loss::l1_loss(x, y, &mask) == doctest::Approx(acc / support).epsilon(1e-6));
}

TEST_CASE("masked l1 ignores everything outside the support") {
  const Tensor x = random_image({1, 3, 8, 8}, 3);
  Tensor y = random_image({1, 3, 8, 8}, 4);
  Tensor mask({8, 8}, 0.0f);
  mask.at(2, 2) = 1.0f;
  mask.at(5, 6) = 1.0f;
  const double base = loss::l1_loss(x, y, &mask);
  Tensor y2 = y;
  for (int c = 0; c < 3; ++c) {
    for (int yy = 0; yy < 8; ++yy) {
      for (int xx = 0; xx < 8; ++xx) {
        if (mask.at(yy, xx) < 0.5f) y2.at(0, c, yy, xx) = 0.123f;  // arbitrary rewrite
      }
    }
  }
  CHECK(loss::l1_loss(x, y2, &mask) == doctest::Approx(base));
}

TEST_CASE("fork objective closed form and structure") {
  LossWeights w{1.0, 100.0};
  // perfect generator: everything matches, D fooled completely
  {
    const Tensor img = random_image({1, 3, 8, 8}, 5);
    const Tensor seg = random_image({1, 3, 8, 8}, 6);
    loss::Objective obj = loss::fork_objective(
        ad::constant(filled({1, 1, 3, 3}, 1.0f - 1e-7f)), ad::constant(img),
        ad::constant(img), ad::constant(seg), ad::constant(seg), w);
    CHECK(obj.report.total == doctest::Approx(0.0).scale(1.0).epsilon(1e-5));
  }
  // lambda1=1, lambda2=100, D=0.5, both L1 = 0.1 -> ln 2 + 20
  {
    loss::Objective obj = loss::fork_objective(
        ad::constant(filled({1, 1, 3, 3}, 0.5f)), ad::constant(filled({1, 3, 8, 8}, 0.1f)),
        ad::constant(filled({1, 3, 8, 8}, 0.0f)), ad::constant(filled({1, 3, 8, 8}, -0.3f)),
        ad::constant(filled({1, 3, 8, 8}, -0.2f)), w);
    CHECK(obj.report.total == doctest::Approx(std::log(2.0) + 20.0).epsilon(1e-6));
    CHECK(obj.report.l1_img == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(obj.report.l1_seg == doctest::Approx(0.1).epsilon(1e-6));
  }
}

TEST_CASE("fork adversarial gradient never touches the segmentation head") {
  LossWeights w{1.0, 100.0};
  const Tensor scores = random_scores({1, 1, 3, 3}, 7);
  const Tensor img = random_image({1, 3, 8, 8}, 8);
  const Tensor img_true = random_image({1, 3, 8, 8}, 9);
  const Tensor seg_true = random_image({1, 3, 8, 8}, 11);

  ad::Var seg = ad::leaf(random_image({1, 3, 8, 8}, 10), true);
  // Scores are computed on the image head only, so they are constants with
  // respect to the seg head by construction.
  ad::Var adv = loss::adv_loss_g(ad::constant(scores));
  ad::backward(adv);
  CHECK(seg->grad.empty());  // identically zero: never reached

  loss::Objective obj = loss::fork_objective(ad::constant(scores), ad::constant(img),
                                             ad::constant(img_true), seg,
                                             ad::constant(seg_true), w);
  ad::backward(obj.total);
  REQUIRE(!seg->grad.empty());
  // The seg gradient equals the weighted masked-L1 sign pattern exactly.
  const double inv_n = w.lambda2 / static_cast<double>(seg->value.size());
  for (int64_t i = 0; i < seg->value.size(); ++i) {
    const float d = seg->value[i] - seg_true[i];
    const float want = static_cast<float>(inv_n) * (d > 0 ? 1.0f : (d < 0 ? -1.0f : 0.0f));
    CHECK(seg->grad[i] == doctest::Approx(want).epsilon(1e-6));
  }
}

TEST_CASE("sequential objective adds stage totals exactly") {
  LossWeights w{1.0, 100.0};
  const Tensor s1 = random_scores({1, 1, 3, 3}, 12);
  const Tensor s2 = random_scores({1, 1, 3, 3}, 13);
  loss::Objective stage1 = loss::pix2pix_objective(
      ad::constant(s1), ad::constant(random_image({1, 3, 8, 8}, 14)),
      ad::constant(random_image({1, 3, 8, 8}, 15)), w);
  loss::Objective stage2 = loss::pix2pix_objective(
      ad::constant(s2), ad::constant(random_image({1, 3, 8, 8}, 16)),
      ad::constant(random_image({1, 3, 8, 8}, 17)), w);
  loss::Objective joint = loss::seq_objective(stage1, stage2);
  CHECK(joint.report.total ==
        doctest::Approx(stage1.report.total + stage2.report.total).epsilon(1e-12));

  // both stages perfect -> 0
  loss::Objective p1 = loss::pix2pix_objective(
      ad::constant(filled({1, 1, 2, 2}, 1.0f - 1e-7f)),
      ad::constant(filled({1, 3, 8, 8}, 0.4f)), ad::constant(filled({1, 3, 8, 8}, 0.4f)), w);
  loss::Objective joint0 = loss::seq_objective(p1, p1);
  CHECK(joint0.report.total == doctest::Approx(0.0).scale(1.0).epsilon(1e-5));
}

TEST_CASE("realism objective semantics") {
  LossWeights w{5.0, 2.0};
  const int s = 8;
  Tensor band({s, s}, 0.0f);
  for (int y = 3; y < 5; ++y) {
    for (int x = 0; x < s; ++x) band.at(y, x) = 1.0f;
  }
  const Tensor comp = random_image({1, 3, s, s}, 18);

  // out == composite and D fooled -> 0
  {
    loss::Objective obj = loss::realism_objective(
        ad::constant(comp), ad::constant(comp),
        ad::constant(filled({1, 1, 2, 2}, 1.0f - 1e-7f)), band, w);
    CHECK(obj.report.total == doctest::Approx(0.0).scale(1.0).epsilon(1e-5));
  }
  // differences confined to the bands leave the pixel term at zero
  {
    Tensor out = comp;
    for (int c = 0; c < 3; ++c) {
      for (int y = 3; y < 5; ++y) {
        for (int x = 0; x < s; ++x) out.at(0, c, y, x) = -out.at(0, c, y, x) * 0.5f + 0.1f;
      }
    }
    loss::Objective obj = loss::realism_objective(
        ad::constant(out), ad::constant(comp), ad::constant(random_scores({1, 1, 2, 2}, 19)),
        band, w);
    CHECK(obj.report.l1_img == doctest::Approx(0.0));
  }
  // random case equals the weighted scalar-oracle sum
  {
    const Tensor out = random_image({1, 3, s, s}, 20);
    const Tensor scores = random_scores({1, 1, 2, 2}, 21);
    loss::Objective obj = loss::realism_objective(ad::constant(out), ad::constant(comp),
                                                  ad::constant(scores), band, w);
    double advg = 0.0;
    for (int64_t i = 0; i < scores.size(); ++i) advg -= std::log(scores[i]);
    advg /= static_cast<double>(scores.size());
    double l1 = 0.0;
    int64_t support = 0;
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < s; ++y) {
        for (int x = 0; x < s; ++x) {
          if (band.at(y, x) > 0.5f) continue;
          l1 += std::fabs(static_cast<double>(out.at(0, c, y, x)) - comp.at(0, c, y, x));
          ++support;
        }
      }
    }
    l1 /= static_cast<double>(support);
    CHECK(obj.report.total == doctest::Approx(5.0 * advg + 2.0 * l1).epsilon(1e-5));
  }
}

TEST_CASE("objective gradients match finite differences on 8x8 toys") {
  LossWeights w{1.0, 100.0};
  const Tensor img_true = random_image({1, 3, 8, 8}, 22);
  const Tensor seg_true = random_image({1, 3, 8, 8}, 23);
  const Tensor scores = random_scores({1, 1, 3, 3}, 24);

  // Eq 6 (pix2pix) w.r.t. the generated image.
  fd_objective(
      random_image({1, 3, 8, 8}, 25),
      [&](const Tensor& t) {
        return loss::pix2pix_objective(ad::constant(scores), ad::constant(t),
                                       ad::constant(img_true), w)
            .report.total;
      },
      [&](const ad::Var& v) {
        return loss::pix2pix_objective(ad::constant(scores), v, ad::constant(img_true), w)
            .total;
      },
      1e-3, 1e-3, 10);

  // Eq 6 w.r.t. the discriminator scores.
  fd_objective(
      random_scores({1, 1, 3, 3}, 26),
      [&](const Tensor& t) {
        return loss::pix2pix_objective(ad::constant(t),
                                       ad::constant(random_image({1, 3, 8, 8}, 27)),
                                       ad::constant(random_image({1, 3, 8, 8}, 27)), w)
            .report.total;
      },
      [&](const ad::Var& v) {
        return loss::pix2pix_objective(v, ad::constant(random_image({1, 3, 8, 8}, 27)),
                                       ad::constant(random_image({1, 3, 8, 8}, 27)), w)
            .total;
      },
      1e-4, 1e-3, 8);

  // Eq 7 (fork) w.r.t. the seg head.
  fd_objective(
      random_image({1, 3, 8, 8}, 28),
      [&](const Tensor& t) {
        return loss::fork_objective(ad::constant(scores),
                                    ad::constant(random_image({1, 3, 8, 8}, 29)),
                                    ad::constant(img_true), ad::constant(t),
                                    ad::constant(seg_true), w)
            .report.total;
      },
      [&](const ad::Var& v) {
        return loss::fork_objective(ad::constant(scores),
                                    ad::constant(random_image({1, 3, 8, 8}, 29)),
                                    ad::constant(img_true), v, ad::constant(seg_true), w)
            .total;
      },
      1e-3, 1e-3, 10);

  // Eq 8 (seq): gradient w.r.t. a stage-2 image flows through the sum.
  fd_objective(
      random_image({1, 3, 8, 8}, 30),
      [&](const Tensor& t) {
        loss::Objective s1 = loss::pix2pix_objective(
            ad::constant(scores), ad::constant(random_image({1, 3, 8, 8}, 31)),
            ad::constant(img_true), w);
        loss::Objective s2 = loss::pix2pix_objective(ad::constant(scores), ad::constant(t),
                                                     ad::constant(seg_true), w);
        return loss::seq_objective(s1, s2).report.total;
      },
      [&](const ad::Var& v) {
        loss::Objective s1 = loss::pix2pix_objective(
            ad::constant(scores), ad::constant(random_image({1, 3, 8, 8}, 31)),
            ad::constant(img_true), w);
        loss::Objective s2 =
            loss::pix2pix_objective(ad::constant(scores), v, ad::constant(seg_true), w);
        return loss::seq_objective(s1, s2).total;
      },
      1e-3, 1e-3, 10);

  // Realism objective w.r.t. the output image.
  LossWeights rw{5.0, 2.0};
  Tensor band({8, 8}, 0.0f);
  for (int x = 0; x < 8; ++x) band.at(4, x) = 1.0f;
  const Tensor comp = random_image({1, 3, 8, 8}, 32);
  fd_objective(
      random_image({1, 3, 8, 8}, 33),
      [&](const Tensor& t) {
        return loss::realism_objective(ad::constant(t), ad::constant(comp),
                                       ad::constant(scores), band, rw)
            .report.total;
      },
      [&](const ad::Var& v) {
        return loss::realism_objective(v, ad::constant(comp), ad::constant(scores), band, rw)
            .total;
      },
      1e-3, 1e-3, 10);
}

TEST_CASE("loss components are non-negative on random inputs") {
  Rng rng(34);
  for (int trial = 0; trial < 25; ++trial) {
    const Tensor r = random_scores({1, 1, 4, 4}, 100 + trial);
    const Tensor f = random_scores({1, 1, 4, 4}, 200 + trial);
    CHECK(loss::adv_loss_d(r, f, 0.9) >= 0.0);
    CHECK(loss::adv_loss_g(f) >= 0.0);
    CHECK(loss::l1_loss(random_image({1, 3, 4, 4}, 300 + trial),
                        random_image({1, 3, 4, 4}, 400 + trial)) >= 0.0);
  }
}

TEST_CASE("the smoothed real-score optimum sits at the smoothing value") {
  // Scan the real-term BCE over a score grid; the minimizer must be within
  // 0.01 of 0.9 under one-sided smoothing.
  double best_score = -1.0, best_val = 1e9;
  for (int i = 1; i < 1000; ++i) {
    const double s = i / 1000.0;
    const double val = -(0.9 * std::log(s) + 0.1 * std::log(1.0 - s));
    if (val < best_val) {
      best_val = val;
      best_score = s;
    }
  }
  CHECK(std::fabs(best_score - 0.9) <= 0.01);

  // The same grid through the implementation agrees.
  best_score = -1.0;
  best_val = 1e9;
  for (int i = 1; i < 100; ++i) {
    const double s = i / 100.0;
    const double val =
        loss::adv_loss_d(filled({1, 1, 1, 1}, static_cast<float>(s)),
                         filled({1, 1, 1, 1}, 1e-7f), 0.9);
    if (val < best_val) {
      best_val = val;
      best_score = s;
    }
  }
  CHECK(std::fabs(best_score - 0.9) <= 0.01);
}

TEST_CASE("loss report csv layout") {
  loss::LossReport r;
  r.adv_d = 1.25;
  r.adv_g = 0.5;
  r.l1_img = 0.125;
  r.total = 13.0;
  CHECK(loss::LossReport::csv_header() == "step,adv_d,adv_g,l1_img,l1_seg,total");
  CHECK(r.csv_row(7) == "7,1.25,0.5,0.125,0,13");
}
