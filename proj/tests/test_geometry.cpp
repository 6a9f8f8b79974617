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

#include "xv/core/rng.hpp"
#include "xv/geometry/geometry.hpp"

using namespace xv;
using geo::Correspondences;
using geo::Homography;
using geo::Point;

namespace {

Correspondences random_quad(Rng& rng, double size) {
  // Corner-anchored jittered quads stay safely non-degenerate.
  Correspondences c;
  auto jitter = [&](double bx, double by) {
    return Point{bx + rng.uniform() * 0.3 * size, by + rng.uniform() * 0.3 * size};
  };
  c.src = {jitter(0, 0), jitter(0.7 * size, 0), jitter(0, 0.7 * size),
           jitter(0.7 * size, 0.7 * size)};
  c.dst = {jitter(0, 0), jitter(0.7 * size, 0), jitter(0, 0.7 * size),
           jitter(0.7 * size, 0.7 * size)};
  return c;
}

double reprojection_error(const Homography& h, const Correspondences& c) {
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Point p = h.apply(c.src[static_cast<size_t>(i)]);
    worst = std::max(worst, std::hypot(p.x - c.dst[static_cast<size_t>(i)].x,
                                       p.y - c.dst[static_cast<size_t>(i)].y));
  }
  return worst;
}

// Independent inverse-mapping bilinear sampler (the warp oracle).
void oracle_warp(const Tensor& img, const Homography& h, Tensor& out, Tensor& mask,
                 float fill) {
  const Homography hinv = h.inverse();
  const int c = img.dim(0), ih = img.dim(1), iw = img.dim(2);
  const int oh = out.dim(1), ow = out.dim(2);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      const Point p = hinv.apply({static_cast<double>(x), static_cast<double>(y)});
      if (!(p.x >= 0.0 && p.x <= iw - 1.0 && p.y >= 0.0 && p.y <= ih - 1.0)) {
        for (int ch = 0; ch < c; ++ch) out.at(ch, y, x) = fill;
        mask.at(y, x) = 0.0f;
        continue;
      }
      mask.at(y, x) = 1.0f;
      const int x0 = std::min(static_cast<int>(std::floor(p.x)), iw - 1);
      const int y0 = std::min(static_cast<int>(std::floor(p.y)), ih - 1);
      const int x1 = std::min(x0 + 1, iw - 1);
      const int y1 = std::min(y0 + 1, ih - 1);
      const double wx = p.x - x0, wy = p.y - y0;
      for (int ch = 0; ch < c; ++ch) {
        const double top = img.at(ch, y0, x0) * (1.0 - wx) + img.at(ch, y0, x1) * wx;
        const double bot = img.at(ch, y1, x0) * (1.0 - wx) + img.at(ch, y1, x1) * wx;
        out.at(ch, y, x) = static_cast<float>(top * (1.0 - wy) + bot * wy);
      }
    }
  }
}

Tensor checkerboard(int size) {
  Tensor t({3, size, size});
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const float v = ((x / 4 + y / 4) % 2 == 0) ? 0.75f : -0.75f;
      for (int c = 0; c < 3; ++c) t.at(c, y, x) = v * (c == 2 ? -1.0f : 1.0f);
    }
  }
  return t;
}

}  // namespace

TEST_CASE("four fixed points give the identity up to scale") {
  Correspondences c;
  c.src = {Point{3, 4}, Point{50, 2}, Point{10, 60}, Point{55, 48}};
  c.dst = c.src;
  const Homography h = geo::estimate_homography(c);
  for (int r = 0; r < 3; ++r) {
    for (int col = 0; col < 3; ++col) {
      CHECK(std::fabs(h.at(r, col) - (r == col ? 1.0 : 0.0)) <= 1e-9);
    }
  }
}

TEST_CASE("pure shift estimates a translation matrix") {
  Correspondences c;
  c.src = {Point{3, 4}, Point{50, 2}, Point{10, 60}, Point{55, 48}};
  for (int i = 0; i < 4; ++i) {
    c.dst[static_cast<size_t>(i)] = {c.src[static_cast<size_t>(i)].x + 5.0,
                                     c.src[static_cast<size_t>(i)].y};
  }
  const Homography h = geo::estimate_homography(c);
  CHECK(std::fabs(h.at(0, 2) - 5.0) <= 1e-9);
  CHECK(std::fabs(h.at(0, 0) - 1.0) <= 1e-9);
  CHECK(std::fabs(h.at(1, 1) - 1.0) <= 1e-9);
  CHECK(std::fabs(h.at(1, 2)) <= 1e-9);
}

TEST_CASE("random non-degenerate quadruples reproject below 1e-6 px") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const Correspondences c = random_quad(rng, 64.0);
    const Homography h = geo::estimate_homography(c);
    CHECK(reprojection_error(h, c) <= 1e-6);
  }
}

TEST_CASE("collinear source points are rejected and named") {
  Correspondences c;
  c.src = {Point{0, 0}, Point{10, 10}, Point{20, 20}, Point{5, 40}};
  c.dst = {Point{0, 0}, Point{10, 0}, Point{0, 10}, Point{10, 10}};
  CHECK_THROWS_WITH_AS(geo::estimate_homography(c),
                       doctest::Contains("source points 0,1,2"), Error);
}

TEST_CASE("homography composition cancels to identity") {
  Rng rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const Correspondences c = random_quad(rng, 64.0);
    const Homography fwd = geo::estimate_homography(c);
    Correspondences back;
    back.src = c.dst;
    back.dst = c.src;
    const Homography rev = geo::estimate_homography(back);
    const Homography prod = fwd.compose(rev);
    // Normalize scale by the trace and measure the off-identity residue.
    const double s = (prod.at(0, 0) + prod.at(1, 1) + prod.at(2, 2)) / 3.0;
    double fro = 0.0;
    for (int r = 0; r < 3; ++r) {
      for (int col = 0; col < 3; ++col) {
        const double want = r == col ? 1.0 : 0.0;
        const double diff = prod.at(r, col) / s - want;
        fro += diff * diff;
      }
    }
    CHECK(std::sqrt(fro) <= 1e-6);
  }
}

TEST_CASE("identity warp copies the image with an all-valid mask") {
  const Tensor img = checkerboard(32);
  const geo::WarpResult r = geo::warp_image(img, Homography(), 32, 32);
  for (int64_t i = 0; i < img.size(); ++i) CHECK(r.image[i] == img[i]);
  for (int64_t i = 0; i < r.validity_mask.size(); ++i) CHECK(r.validity_mask[i] == 1.0f);
}

TEST_CASE("translation by the full width invalidates every pixel") {
  const Tensor img = checkerboard(16);
  const Homography h(std::array<double, 9>{1, 0, 16, 0, 1, 0, 0, 0, 1});
  const geo::WarpResult r = geo::warp_image(img, h, 16, 16);
  for (int64_t i = 0; i < r.validity_mask.size(); ++i) CHECK(r.validity_mask[i] == 0.0f);
  for (int64_t i = 0; i < r.image.size(); ++i) CHECK(r.image[i] == -1.0f);
}

TEST_CASE("projective warp matches the brute-force oracle") {
  const Tensor img = checkerboard(48);
  Correspondences c;
  c.src = {Point{0, 0}, Point{47, 0}, Point{0, 47}, Point{47, 47}};
  c.dst = {Point{4, 2}, Point{44, 6}, Point{2, 45}, Point{40, 38}};
  const Homography h = geo::estimate_homography(c);
  const geo::WarpResult got = geo::warp_image(img, h, 48, 48);
  Tensor want({3, 48, 48}), want_mask({48, 48});
  oracle_warp(img, h, want, want_mask, -1.0f);
  for (int64_t i = 0; i < want.size(); ++i) {
    CHECK(std::fabs(got.image[i] - want[i]) <= 1e-6);
  }
  for (int64_t i = 0; i < want_mask.size(); ++i) {
    CHECK(got.validity_mask[i] == want_mask[i]);
  }
}

TEST_CASE("warp round trip loses only interpolation error") {
  // Smooth content: two bilinear passes on hard edges would swamp the bound.
  Tensor img({3, 48, 48});
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 48; ++x) {
      img.at(0, y, x) = 0.7f * std::sin(x / 7.0f) * std::cos(y / 9.0f);
      img.at(1, y, x) = 0.5f * std::cos((x + y) / 11.0f);
      img.at(2, y, x) = 0.6f * std::sin(y / 8.0f);
    }
  }
  Correspondences c;
  c.src = {Point{0, 0}, Point{47, 0}, Point{0, 47}, Point{47, 47}};
  c.dst = {Point{3, 1}, Point{45, 4}, Point{1, 46}, Point{42, 41}};
  const Homography h = geo::estimate_homography(c);
  const geo::WarpResult fwd = geo::warp_image(img, h, 48, 48);
  const geo::WarpResult back = geo::warp_image(fwd.image, h.inverse(), 48, 48);
  // Round trip also needs the intermediate pixels to have been valid; pull
  // the forward validity mask back through the inverse warp.
  Tensor fwd_valid({1, 48, 48});
  for (int64_t i = 0; i < fwd.validity_mask.size(); ++i) fwd_valid[i] = fwd.validity_mask[i];
  const geo::WarpResult valid_back = geo::warp_image(fwd_valid, h.inverse(), 48, 48, 0.0f);
  double acc = 0.0;
  int64_t count = 0;
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 48; ++x) {
      if (back.validity_mask.at(y, x) < 0.5f) continue;
      if (valid_back.image.at(0, y, x) < 0.999f) continue;
      for (int ch = 0; ch < 3; ++ch) {
        acc += std::fabs(back.image.at(ch, y, x) - img.at(ch, y, x));
        ++count;
      }
    }
  }
  REQUIRE(count > 1000);
  CHECK(acc / static_cast<double>(count) <= 0.02);
}

TEST_CASE("region masks: areas, empty band, disjointness") {
  const geo::Rect r1{0, 0, 256, 128};
  const geo::Rect r2{64, 184, 192, 256};
  const geo::RegionMaskSet ms = geo::make_region_masks(256, r1, r2, 0);
  double m1_sum = 0, m2_sum = 0, band_sum = 0;
  for (int64_t i = 0; i < ms.m1.size(); ++i) {
    m1_sum += ms.m1[i];
    m2_sum += ms.m2[i];
    band_sum += ms.band[i];
    CHECK(ms.m1[i] * ms.m2[i] == 0.0f);  // disjoint everywhere
  }
  CHECK(m1_sum == 128.0 * 256.0);
  CHECK(m2_sum == 128.0 * 72.0);
  CHECK(band_sum == 0.0);  // band width 0 -> empty band
}

TEST_CASE("band pixel count matches a brute-force distance scan") {
  const int frame = 256;
  const geo::Rect r1{0, 0, 256, 128};
  const geo::Rect r2{64, 184, 192, 256};
  const int w = 8;
  const geo::RegionMaskSet ms = geo::make_region_masks(frame, r1, r2, w);

  // Oracle: collect perimeter pixels, then scan every pixel for Chebyshev
  // distance < w to any of them.
  std::vector<std::pair<int, int>> boundary;
  for (const geo::Rect& r : {r1, r2}) {
    for (int x = r.x0; x < r.x1; ++x) {
      boundary.emplace_back(x, r.y0);
      boundary.emplace_back(x, r.y1 - 1);
    }
    for (int y = r.y0; y < r.y1; ++y) {
      boundary.emplace_back(r.x0, y);
      boundary.emplace_back(r.x1 - 1, y);
    }
  }
  int64_t want = 0;
  Tensor oracle({frame, frame}, 0.0f);
  for (int y = 0; y < frame; ++y) {
    for (int x = 0; x < frame; ++x) {
      int best = 1 << 30;
      for (const auto& [bx, by] : boundary) {
        best = std::min(best, std::max(std::abs(x - bx), std::abs(y - by)));
      }
      if (best < w) {
        oracle.at(y, x) = 1.0f;
        ++want;
      }
    }
  }
  int64_t got = 0;
  for (int64_t i = 0; i < ms.band.size(); ++i) {
    CHECK(ms.band[i] == oracle[i]);
    got += ms.band[i] > 0.5f ? 1 : 0;
  }
  CHECK(got == want);
}

TEST_CASE("overlapping rectangles are rejected") {
  CHECK_THROWS_AS(geo::make_region_masks(64, {0, 0, 40, 40}, {30, 30, 60, 60}, 2), Error);
}

TEST_CASE("compositing identities and the pixelwise oracle") {
  Rng rng(5);
  const int frame = 32;
  const geo::Rect r1{0, 0, frame, frame / 2};
  const geo::Rect r2{8, 24, 24, 32};
  const geo::RegionMaskSet ms = geo::make_region_masks(frame, r1, r2, 2);

  auto rand_img = [&](uint64_t seed) {
    Rng r(seed);
    Tensor t({3, frame, frame});
    for (int64_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(r.uniform() * 2 - 1);
    return t;
  };
  const Tensor a = rand_img(1), b = rand_img(2), c = rand_img(3);

  // identical inputs pass through
  const Tensor same = geo::composite_regions(a, a, a, ms);
  for (int64_t i = 0; i < a.size(); ++i) CHECK(same[i] == a[i]);

  // all-ones M1 with empty-ish M2: output equals the inpaint image
  {
    const geo::RegionMaskSet full =
        geo::make_region_masks(frame, {0, 0, frame, frame - 1}, {0, frame - 1, 1, frame}, 0);
    geo::RegionMaskSet m1_all = full;
    m1_all.m1.fill(1.0f);
    m1_all.m2.fill(0.0f);
    const Tensor out = geo::composite_regions(a, b, c, m1_all);
    for (int64_t i = 0; i < a.size(); ++i) CHECK(out[i] == a[i]);
  }

  // pixelwise three-branch select oracle, exact
  const Tensor out = geo::composite_regions(a, b, c, ms);
  for (int ch = 0; ch < 3; ++ch) {
    for (int y = 0; y < frame; ++y) {
      for (int x = 0; x < frame; ++x) {
        float want;
        if (ms.m1.at(y, x) > 0.5f) want = a.at(ch, y, x);
        else if (ms.m2.at(y, x) > 0.5f) want = b.at(ch, y, x);
        else want = c.at(ch, y, x);
        CHECK(out.at(ch, y, x) == want);
      }
    }
  }

  // mask partition: M1 + M2 + (M - M1 - M2) == M exactly
  for (int64_t i = 0; i < ms.m1.size(); ++i) {
    CHECK(ms.m1[i] + ms.m2[i] + (1.0f - ms.m1[i] - ms.m2[i]) == 1.0f);
  }

  // compositing the composite with itself in all three roles is idempotent
  const Tensor again = geo::composite_regions(out, out, out, ms);
  for (int64_t i = 0; i < out.size(); ++i) CHECK(again[i] == out[i]);
}

TEST_CASE("composite rejects shape mismatches") {
  const geo::RegionMaskSet ms = geo::make_region_masks(16, {0, 0, 16, 8}, {4, 12, 12, 16}, 1);
  Tensor a({3, 16, 16}), b({3, 16, 16}), bad({3, 8, 8});
  CHECK_THROWS_AS(geo::composite_regions(a, b, bad, ms), Error);
}

TEST_CASE("homography file round trip") {
  const Homography h(std::array<double, 9>{1.5, 0.1, 3, -0.2, 0.9, 7, 1e-4, -2e-4, 1});
  const auto tmp = std::filesystem::temp_directory_path() / "xv_h_test.txt";
  h.save(tmp);
  const Homography back = Homography::load(tmp);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) CHECK(back.at(r, c) == doctest::Approx(h.at(r, c)).epsilon(1e-12));
  }
  std::filesystem::remove(tmp);
}

TEST_CASE("singular homography is rejected") {
  CHECK_THROWS_AS(Homography(std::array<double, 9>{1, 2, 3, 2, 4, 6, 0, 0, 1}), Error);
}
