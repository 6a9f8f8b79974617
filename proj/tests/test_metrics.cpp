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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xv/core/image.hpp"
#include "xv/data/dataman.hpp"
#include "xv/metrics/metrics.hpp"

using namespace xv;
using metrics::AccuracyMode;

namespace {

Tensor rows(std::vector<std::vector<double>> vals) {
  Tensor t({static_cast<int>(vals.size()), static_cast<int>(vals[0].size())});
  for (size_t i = 0; i < vals.size(); ++i) {
    for (size_t j = 0; j < vals[i].size(); ++j) {
      t.at(static_cast<int>(i), static_cast<int>(j)) = static_cast<float>(vals[i][j]);
    }
  }
  return t;
}

Tensor random_probs(int n, int c, uint64_t seed) {
  Rng rng(seed);
  Tensor t({n, c});
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < c; ++j) {
      t.at(i, j) = static_cast<float>(rng.uniform() + 0.01);
      sum += t.at(i, j);
    }
    for (int j = 0; j < c; ++j) t.at(i, j) = static_cast<float>(t.at(i, j) / sum);
  }
  return t;
}

Tensor image_255(const std::vector<std::vector<int>>& gray) {
  const int h = static_cast<int>(gray.size());
  const int w = static_cast<int>(gray[0].size());
  Tensor t({3, h, w});
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        t.at(c, y, x) = img::to_unit(static_cast<uint8_t>(gray[static_cast<size_t>(y)][static_cast<size_t>(x)]));
      }
    }
  }
  return t;
}

Tensor random_image(int h, int w, uint64_t seed) {
  Rng rng(seed);
  Tensor t({3, h, w});
  for (int64_t i = 0; i < t.size(); ++i) {
    t[i] = img::to_unit(static_cast<uint8_t>(rng.uniform_int(0, 255)));
  }
  return t;
}

// Direct windowed SSIM oracle: same declared definition, separate code.
double ssim_oracle(const Tensor& x, const Tensor& y) {
  const int h = x.dim(1), w = x.dim(2);
  auto luma = [](const Tensor& t, int yy, int xx) {
    return 0.299 * img::to_255(t.at(0, yy, xx)) + 0.587 * img::to_255(t.at(1, yy, xx)) +
           0.114 * img::to_255(t.at(2, yy, xx));
  };
  std::vector<double> g(121);
  double gsum = 0.0;
  for (int i = 0; i < 11; ++i) {
    for (int j = 0; j < 11; ++j) {
      const double di = i - 5.0, dj = j - 5.0;
      g[static_cast<size_t>(i * 11 + j)] = std::exp(-(di * di + dj * dj) / 4.5);
      gsum += g[static_cast<size_t>(i * 11 + j)];
    }
  }
  for (auto& v : g) v /= gsum;
  const double c1 = 6.5025, c2 = 58.5225;
  double acc = 0.0;
  int count = 0;
  for (int y0 = 0; y0 + 11 <= h; ++y0) {
    for (int x0 = 0; x0 + 11 <= w; ++x0) {
      double mx = 0, my = 0, vx = 0, vy = 0, vxy = 0;
      for (int i = 0; i < 11; ++i) {
        for (int j = 0; j < 11; ++j) {
          mx += g[static_cast<size_t>(i * 11 + j)] * luma(x, y0 + i, x0 + j);
          my += g[static_cast<size_t>(i * 11 + j)] * luma(y, y0 + i, x0 + j);
        }
      }
      for (int i = 0; i < 11; ++i) {
        for (int j = 0; j < 11; ++j) {
          const double dx = luma(x, y0 + i, x0 + j) - mx;
          const double dy = luma(y, y0 + i, x0 + j) - my;
          vx += g[static_cast<size_t>(i * 11 + j)] * dx * dx;
          vy += g[static_cast<size_t>(i * 11 + j)] * dy * dy;
          vxy += g[static_cast<size_t>(i * 11 + j)] * dx * dy;
        }
      }
      acc += ((2 * mx * my + c1) * (2 * vxy + c2)) /
             ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return acc / count;
}

// Classifier stub: probabilities from pooled channel statistics, purely a
// function of the image, so identical sets yield identical matrices.
class StubClassifier : public metrics::ClassifierHandle {
 public:
  int num_classes() const override { return 6; }
  Tensor probs(const std::vector<Tensor>& images) override {
    Tensor out({static_cast<int>(images.size()), 6});
    for (size_t i = 0; i < images.size(); ++i) {
      const Tensor f = feats(images[i]);
      double mx = f[0];
      for (int j = 1; j < 6; ++j) mx = std::max(mx, static_cast<double>(f[j]));
      double z = 0.0;
      for (int j = 0; j < 6; ++j) z += std::exp(60.0 * (f[j] - mx));
      for (int j = 0; j < 6; ++j) {
        out.at(static_cast<int>(i), j) = static_cast<float>(std::exp(60.0 * (f[j] - mx)) / z);
      }
    }
    return out;
  }
  Tensor acts(const std::vector<Tensor>& images) override {
    Tensor out({static_cast<int>(images.size()), 6});
    for (size_t i = 0; i < images.size(); ++i) {
      const Tensor f = feats(images[i]);
      for (int j = 0; j < 6; ++j) out.at(static_cast<int>(i), j) = f[j];
    }
    return out;
  }

 private:
  static Tensor feats(const Tensor& img_t) {
    Tensor f({6}, 0.0f);
    const int h = img_t.dim(1), w = img_t.dim(2);
    for (int c = 0; c < 3; ++c) {
      double m = 0, v = 0;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) m += img_t.at(c, y, x);
      }
      m /= h * w;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          v += (img_t.at(c, y, x) - m) * (img_t.at(c, y, x) - m);
        }
      }
      f[c] = static_cast<float>(m);
      f[c + 3] = static_cast<float>(std::sqrt(v / (h * w)));
    }
    return f;
  }
};

}  // namespace

TEST_CASE("topk_smooth spreads the residual mass") {
  const std::vector<double> p = {0.7, 0.2, 0.1, 0.0};
  const std::vector<double> sm = metrics::topk_smooth(p, 1);
  CHECK(sm[0] == doctest::Approx(0.7));
  CHECK(sm[1] == doctest::Approx(0.1));
  CHECK(sm[2] == doctest::Approx(0.1));
  CHECK(sm[3] == doctest::Approx(0.1));

  CHECK(metrics::topk_smooth(p, 4) == p);  // k == C is the identity

  const std::vector<double> onehot = {0.0, 1.0, 0.0};
  for (int k = 1; k <= 3; ++k) {
    const std::vector<double> s = metrics::topk_smooth(onehot, k);
    for (size_t i = 0; i < 3; ++i) CHECK(s[i] == doctest::Approx(onehot[i]));
  }

  CHECK_THROWS_AS(metrics::topk_smooth(p, 0), Error);
  CHECK_THROWS_AS(metrics::topk_smooth(p, 5), Error);
}

TEST_CASE("topk_smooth follows the epsilon rule on 1000 random vectors") {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const int c = rng.uniform_int(2, 12);
    std::vector<double> p(static_cast<size_t>(c));
    double sum = 0.0;
    for (auto& v : p) {
      v = rng.uniform() + 1e-4;
      sum += v;
    }
    for (auto& v : p) v /= sum;
    const int k = rng.uniform_int(1, c);
    const std::vector<double> sm = metrics::topk_smooth(p, k);

    std::vector<int> idx(static_cast<size_t>(c));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return p[static_cast<size_t>(a)] > p[static_cast<size_t>(b)]; });
    double top_mass = 0.0;
    for (int i = 0; i < k; ++i) top_mass += p[static_cast<size_t>(idx[static_cast<size_t>(i)])];
    const double eps = k == c ? 0.0 : (1.0 - top_mass) / (c - k);

    double total = 0.0;
    for (int i = 0; i < c; ++i) {
      const bool is_top = std::find(idx.begin(), idx.begin() + k, i) != idx.begin() + k;
      if (is_top) CHECK(sm[static_cast<size_t>(i)] == doctest::Approx(p[static_cast<size_t>(i)]));
      else CHECK(sm[static_cast<size_t>(i)] == doctest::Approx(eps).epsilon(1e-12));
      total += sm[static_cast<size_t>(i)];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("inception score limits") {
  // identical rows -> exactly 1
  Tensor same({5, 4});
  for (int i = 0; i < 5; ++i) {
    same.at(i, 0) = 0.4f;
    same.at(i, 1) = 0.3f;
    same.at(i, 2) = 0.2f;
    same.at(i, 3) = 0.1f;
  }
  CHECK(std::fabs(metrics::inception_score(same) - 1.0) <= 1e-9);

  // N distinct one-hot rows over N classes -> N
  const int n = 6;
  Tensor onehot({n, n}, 0.0f);
  for (int i = 0; i < n; ++i) onehot.at(i, i) = 1.0f;
  CHECK(std::fabs(metrics::inception_score(onehot) - n) <= 1e-6);

  // uniform rows -> 1
  Tensor uni({4, 8}, 1.0f / 8.0f);
  CHECK(std::fabs(metrics::inception_score(uni) - 1.0) <= 1e-9);

  // range [1, C] on random matrices
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const Tensor p = random_probs(20, 7, seed);
    const double is = metrics::inception_score(p);
    CHECK(is >= 1.0 - 1e-9);
    CHECK(is <= 7.0 + 1e-9);
  }

  // smoothing keeps the score defined for top-k variants
  const Tensor p = random_probs(16, 9, 3);
  CHECK(metrics::inception_score(p, 1) >= 1.0 - 1e-9);
  CHECK(metrics::inception_score(p, 5) >= 1.0 - 1e-9);
  CHECK_THROWS_AS(metrics::inception_score(Tensor(), 0), Error);
}

TEST_CASE("top-k accuracy in both counting modes") {
  const Tensor real = random_probs(10, 5, 4);
  CHECK(metrics::topk_accuracy(real, real, 1, AccuracyMode::kAll) == doctest::Approx(100.0));
  CHECK(metrics::topk_accuracy(real, real, 5, AccuracyMode::kAll) == doctest::Approx(100.0));

  // argmax-disjoint fake: shift all mass to (label+1) mod C
  Tensor fake({10, 5}, 0.0f);
  for (int i = 0; i < 10; ++i) {
    int label = 0;
    for (int j = 1; j < 5; ++j) {
      if (real.at(i, j) > real.at(i, label)) label = j;
    }
    fake.at(i, (label + 1) % 5) = 1.0f;
  }
  CHECK(metrics::topk_accuracy(real, fake, 1, AccuracyMode::kAll) == doctest::Approx(0.0));

  // hand-built confident case: 2 confident rows, 1 hit -> 50%
  const Tensor r5 = rows({{0.9, 0.05, 0.05},    // confident, label 0
                          {0.6, 0.3, 0.1},      // confident, label 0
                          {0.4, 0.35, 0.25},    // not confident
                          {0.34, 0.33, 0.33},   // not confident
                          {0.45, 0.3, 0.25}});  // not confident
  const Tensor f5 = rows({{0.8, 0.1, 0.1},      // hit
                          {0.1, 0.8, 0.1},      // miss
                          {0.9, 0.05, 0.05},
                          {0.9, 0.05, 0.05},
                          {0.9, 0.05, 0.05}});
  CHECK(metrics::topk_accuracy(r5, f5, 1, AccuracyMode::kConfident) == doctest::Approx(50.0));

  // zero qualifying rows -> error reporting the count
  const Tensor meek = rows({{0.4, 0.3, 0.3}, {0.35, 0.35, 0.3}});
  CHECK_THROWS_WITH_AS(metrics::topk_accuracy(meek, meek, 1, AccuracyMode::kConfident),
                       doctest::Contains("0 of 2"), Error);
}

TEST_CASE("KL(model || data) closed forms and invariances") {
  const Tensor p = random_probs(12, 4, 5);
  CHECK(std::fabs(metrics::kl_model_data(p, p, 1).mean) <= 1e-9);

  const Tensor q = rows({{1.0, 0.0}});
  const Tensor r = rows({{0.5, 0.5}});
  CHECK(metrics::kl_model_data(q, r, 1).mean == doctest::Approx(std::log(2.0)).epsilon(1e-9));

  // permuting rows within a batch leaves the score unchanged
  Tensor shuffled = p;
  for (int j = 0; j < 4; ++j) {
    std::swap(shuffled.at(2, j), shuffled.at(7, j));
    std::swap(shuffled.at(0, j), shuffled.at(11, j));
  }
  const metrics::MeanStd a = metrics::kl_model_data(p, p, 1);
  const metrics::MeanStd b = metrics::kl_model_data(shuffled, p, 1);
  CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-12));

  // non-negativity across random batch splits
  for (int batches : {1, 2, 3}) {
    const metrics::MeanStd ms = metrics::kl_model_data(random_probs(12, 4, 6), p, batches);
    CHECK(ms.mean >= 0.0);
    CHECK(ms.std >= 0.0);
  }

  // a zero real column with fake mass hits the documented floor, not a NaN
  const Tensor fake0 = rows({{0.7, 0.3}});
  const Tensor real0 = rows({{1.0, 0.0}});
  CHECK(std::isfinite(metrics::kl_model_data(fake0, real0, 1).mean));
}

TEST_CASE("ssim: identity, constants, oracle, symmetry") {
  const Tensor x = random_image(32, 32, 7);
  CHECK(metrics::ssim(x, x) == doctest::Approx(1.0).epsilon(1e-9));

  // constant images: contrast/structure terms cancel to 1
  Tensor a({3, 16, 16}), b({3, 16, 16});
  for (int64_t i = 0; i < a.size(); ++i) {
    a[i] = img::to_unit(100);
    b[i] = img::to_unit(150);
  }
  const double c1 = 6.5025;
  const double want = (2.0 * 100.0 * 150.0 + c1) / (100.0 * 100.0 + 150.0 * 150.0 + c1);
  CHECK(metrics::ssim(a, b) == doctest::Approx(want).epsilon(1e-6));

  const Tensor y = random_image(32, 32, 8);
  CHECK(metrics::ssim(x, y) == doctest::Approx(ssim_oracle(x, y)).epsilon(1e-6));
  CHECK(std::fabs(metrics::ssim(x, y) - metrics::ssim(y, x)) <= 1e-9);

  Tensor tiny({3, 8, 8}, 0.0f);
  CHECK_THROWS_AS(metrics::ssim(tiny, tiny), Error);
}

TEST_CASE("psnr: cap, one-level difference, oracle") {
  const Tensor x = random_image(16, 16, 9);
  CHECK(metrics::psnr(x, x) == doctest::Approx(100.0));

  Tensor a({3, 8, 8}), b({3, 8, 8});
  for (int64_t i = 0; i < a.size(); ++i) {
    a[i] = img::to_unit(100);
    b[i] = img::to_unit(101);
  }
  CHECK(metrics::psnr(a, b) == doctest::Approx(10.0 * std::log10(255.0 * 255.0)).epsilon(1e-4));

  const Tensor y = random_image(16, 16, 10);
  double mse = 0.0;
  for (int64_t i = 0; i < x.size(); ++i) {
    const double d = img::to_255(x[i]) - img::to_255(y[i]);
    mse += d * d;
  }
  mse /= static_cast<double>(x.size());
  CHECK(metrics::psnr(x, y) ==
        doctest::Approx(10.0 * std::log10(255.0 * 255.0 / mse)).epsilon(1e-9));
}

TEST_CASE("sharpness difference: caps and the 4x4 hand case") {
  const Tensor x = random_image(8, 8, 11);
  CHECK(metrics::sharpness_difference(x, x) == doctest::Approx(100.0));

  Tensor c1({3, 8, 8}, 0.2f), c2({3, 8, 8}, -0.7f);
  CHECK(metrics::sharpness_difference(c1, c2) == doctest::Approx(100.0));

  // single unit step edge in x only: gradient maps differ by 1 in column 1
  const Tensor step = image_255({{100, 100, 101, 101},
                                 {100, 100, 101, 101},
                                 {100, 100, 101, 101},
                                 {100, 100, 101, 101}});
  const Tensor flat = image_255({{100, 100, 100, 100},
                                 {100, 100, 100, 100},
                                 {100, 100, 100, 100},
                                 {100, 100, 100, 100}});
  // interior 3x3: |grad| difference is 1 at j==1, else 0 -> mean 1/3
  const double want = 10.0 * std::log10(255.0 * 255.0 / (1.0 / 3.0));
  CHECK(metrics::sharpness_difference(step, flat) == doctest::Approx(want).epsilon(1e-4));
}

TEST_CASE("fid: zero, closed-form Gaussians, symmetry") {
  // identical matrices -> 0
  Tensor a({8, 3});
  Rng rng(12);
  for (int64_t i = 0; i < a.size(); ++i) a[i] = static_cast<float>(rng.gaussian(0, 1));
  CHECK(metrics::fid(a, a) <= 1e-6);

  // 1-D: exact population stats mean 0 sd 1 vs mean 3 sd 1 -> 9.0
  const Tensor real1 = rows({{-1.0}, {1.0}});
  const Tensor fake1 = rows({{2.0}, {4.0}});
  CHECK(metrics::fid(real1, fake1) == doctest::Approx(9.0).epsilon(1e-4));

  // d-dim mean shift with equal covariances -> ||delta||^2
  const int n = 40, d = 5;
  Tensor base({n, d});
  for (int64_t i = 0; i < base.size(); ++i) base[i] = static_cast<float>(rng.gaussian(0, 1));
  Tensor shifted = base;
  double want = 0.0;
  for (int j = 0; j < d; ++j) {
    const double delta = 0.3 * (j + 1);
    want += delta * delta;
    for (int i = 0; i < n; ++i) shifted.at(i, j) += static_cast<float>(delta);
  }
  CHECK(metrics::fid(base, shifted) == doctest::Approx(want).epsilon(1e-4));

  // symmetry
  Tensor b({30, 4}), c({30, 4});
  for (int64_t i = 0; i < b.size(); ++i) {
    b[i] = static_cast<float>(rng.gaussian(0, 1));
    c[i] = static_cast<float>(rng.gaussian(0.5, 1.7));
  }
  CHECK(std::fabs(metrics::fid(b, c) - metrics::fid(c, b)) <= 1e-8);
}

TEST_CASE("matrix file round trip") {
  const Tensor m = random_probs(5, 3, 13);
  const auto tmp = std::filesystem::temp_directory_path() / "xv_matrix_test.txt";
  metrics::save_matrix(tmp, m);
  const Tensor back = metrics::load_matrix(tmp);
  REQUIRE(back.shape() == m.shape());
  for (int64_t i = 0; i < m.size(); ++i) CHECK(back[i] == doctest::Approx(m[i]).epsilon(1e-6));
  std::filesystem::remove(tmp);
}

TEST_CASE("evaluate on identical sets hits the fixed points") {
  std::vector<Tensor> imgs;
  for (uint64_t i = 0; i < 8; ++i) imgs.push_back(data::synth_scene(i, 64).ground);
  StubClassifier clf;
  metrics::EvalOptions opt;
  opt.kl_batches = 1;
  const metrics::MetricReport r = metrics::evaluate(imgs, imgs, clf, opt);
  CHECK(r.ssim_v == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.psnr_v == doctest::Approx(100.0));
  CHECK(r.sd_v == doctest::Approx(100.0));
  CHECK(r.fid_v <= 1e-6);
  CHECK(r.kl_mean <= 1e-9);
  CHECK(r.acc_top1_all == doctest::Approx(100.0));
  CHECK(r.acc_top5_all == doctest::Approx(100.0));
  CHECK(r.is_all >= 1.0 - 1e-9);
}

TEST_CASE("report schema carries the full battery") {
  const auto& cols = metrics::MetricReport::column_names();
  const std::vector<std::string> want = {
      "inception_all", "inception_top1", "inception_top5", "acc_top1_all",
      "acc_top1_0.5",  "acc_top5_all",   "acc_top5_0.5",   "kl_mean",
      "kl_std",        "ssim",           "psnr",           "sd",
      "fid"};
  CHECK(cols == want);
  metrics::MetricReport r;
  r.is_all = 2.5;
  const std::string csv = r.to_csv();
  CHECK(csv.find("inception_all") != std::string::npos);
  CHECK(csv.find("fid") != std::string::npos);

  const auto tmp = std::filesystem::temp_directory_path() / "xv_metrics_test.csv";
  r.save_csv(tmp);
  const metrics::MetricReport back = metrics::MetricReport::load_csv(tmp);
  CHECK(back.is_all == doctest::Approx(2.5));
  std::filesystem::remove(tmp);
}

TEST_CASE("shuffling the pairing strictly degrades mean SSIM") {
  std::vector<Tensor> real, fake;
  for (uint64_t i = 0; i < 6; ++i) real.push_back(data::synth_scene(i, 64).ground);
  fake = real;
  std::rotate(fake.begin(), fake.begin() + 1, fake.end());
  double aligned = 0, shuffled = 0;
  for (size_t i = 0; i < real.size(); ++i) {
    aligned += metrics::ssim(real[i], real[i]);
    shuffled += metrics::ssim(real[i], fake[i]);
  }
  CHECK(shuffled / 6.0 < aligned / 6.0);
}

TEST_CASE("probability matrix validation catches bad rows") {
  Tensor bad({2, 3}, 0.2f);
  CHECK_THROWS_AS(metrics::validate_prob_matrix(bad), Error);
  Tensor neg = rows({{1.2, -0.2, 0.0}});
  CHECK_THROWS_AS(metrics::validate_prob_matrix(neg), Error);
}
