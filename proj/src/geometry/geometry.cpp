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

#include "xv/geometry/geometry.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "xv/core/image.hpp"
#include "xv/core/linalg.hpp"

namespace xv::geo {

namespace {

constexpr double kDetTol = 1e-9;

double cross2(const Point& a, const Point& b, const Point& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

// Scale-invariant collinearity check over every point triple.
void check_not_collinear(const std::array<Point, 4>& pts, const char* which) {
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      for (int k = j + 1; k < 4; ++k) {
        const double area2 = std::fabs(cross2(pts[i], pts[j], pts[k]));
        const double d1 = std::hypot(pts[j].x - pts[i].x, pts[j].y - pts[i].y);
        const double d2 = std::hypot(pts[k].x - pts[i].x, pts[k].y - pts[i].y);
        const double scale = std::max(d1 * d2, 1e-12);
        if (area2 / scale < 1e-8) {
          std::ostringstream os;
          os << "degenerate correspondences: " << which << " points " << i
             << "," << j << "," << k << " are collinear";
          fail("degenerate", os.str());
        }
      }
    }
  }
}

struct NormXform {
  double scale = 1.0;
  Point centroid;
};

NormXform isotropic_norm(const std::array<Point, 4>& pts,
                         std::array<Point, 4>& out) {
  NormXform nx;
  for (const auto& p : pts) {
    nx.centroid.x += p.x / 4.0;
    nx.centroid.y += p.y / 4.0;
  }
  double mean_dist = 0.0;
  for (const auto& p : pts) {
    mean_dist += std::hypot(p.x - nx.centroid.x, p.y - nx.centroid.y) / 4.0;
  }
  nx.scale = mean_dist > 1e-12 ? std::sqrt(2.0) / mean_dist : 1.0;
  for (int i = 0; i < 4; ++i) {
    out[static_cast<size_t>(i)].x = (pts[static_cast<size_t>(i)].x - nx.centroid.x) * nx.scale;
    out[static_cast<size_t>(i)].y = (pts[static_cast<size_t>(i)].y - nx.centroid.y) * nx.scale;
  }
  return nx;
}

}  // namespace

Homography::Homography() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

Homography::Homography(const std::array<double, 9>& row_major) : m_(row_major) {
  normalize();
  require(std::fabs(det()) > kDetTol, "degenerate",
          "homography is singular (|det| <= 1e-9)");
}

void Homography::normalize() {
  if (m_[8] != 0.0) {
    for (auto& v : m_) v /= m_[8];
    m_[8] = 1.0;
  }
}

double Homography::det() const {
  return m_[0] * (m_[4] * m_[8] - m_[5] * m_[7]) -
         m_[1] * (m_[3] * m_[8] - m_[5] * m_[6]) +
         m_[2] * (m_[3] * m_[7] - m_[4] * m_[6]);
}

Point Homography::apply(const Point& p) const {
  Point out;
  require(apply_safe(p, &out), "numeric", "point maps to infinity");
  return out;
}

bool Homography::apply_safe(const Point& p, Point* out) const {
  const double w = m_[6] * p.x + m_[7] * p.y + m_[8];
  if (std::fabs(w) < 1e-12) return false;
  out->x = (m_[0] * p.x + m_[1] * p.y + m_[2]) / w;
  out->y = (m_[3] * p.x + m_[4] * p.y + m_[5]) / w;
  return true;
}

Homography Homography::inverse() const {
  const double d = det();
  require(std::fabs(d) > kDetTol, "degenerate", "cannot invert singular homography");
  const auto& m = m_;
  std::array<double, 9> inv = {
      (m[4] * m[8] - m[5] * m[7]) / d, (m[2] * m[7] - m[1] * m[8]) / d,
      (m[1] * m[5] - m[2] * m[4]) / d, (m[5] * m[6] - m[3] * m[8]) / d,
      (m[0] * m[8] - m[2] * m[6]) / d, (m[2] * m[3] - m[0] * m[5]) / d,
      (m[3] * m[7] - m[4] * m[6]) / d, (m[1] * m[6] - m[0] * m[7]) / d,
      (m[0] * m[4] - m[1] * m[3]) / d};
  return Homography(inv);
}

Homography Homography::compose(const Homography& rhs) const {
  std::array<double, 9> out{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) acc += at(r, k) * rhs.at(k, c);
      out[static_cast<size_t>(r) * 3 + c] = acc;
    }
  }
  return Homography(out);
}

void Homography::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  require(out.good(), "io", "cannot write homography: " + path.string());
  out.precision(17);
  for (int i = 0; i < 9; ++i) out << m_[static_cast<size_t>(i)] << (i % 3 == 2 ? "\n" : " ");
}

Homography Homography::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "io", "cannot open homography: " + path.string());
  std::array<double, 9> m{};
  for (auto& v : m) {
    require(static_cast<bool>(in >> v), "io",
            "homography file needs nine numbers: " + path.string());
  }
  return Homography(m);
}

Correspondences Correspondences::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "io", "cannot open correspondences: " + path.string());
  Correspondences c;
  for (int i = 0; i < 4; ++i) {
    require(static_cast<bool>(in >> c.src[static_cast<size_t>(i)].x >>
                              c.src[static_cast<size_t>(i)].y >>
                              c.dst[static_cast<size_t>(i)].x >>
                              c.dst[static_cast<size_t>(i)].y),
            "io", "correspondence file needs four `sx sy tx ty` lines: " + path.string());
  }
  return c;
}

void Correspondences::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  require(out.good(), "io", "cannot write correspondences: " + path.string());
  out.precision(17);
  for (int i = 0; i < 4; ++i) {
    out << src[static_cast<size_t>(i)].x << " " << src[static_cast<size_t>(i)].y << " "
        << dst[static_cast<size_t>(i)].x << " " << dst[static_cast<size_t>(i)].y << "\n";
  }
}

Homography estimate_homography(const Correspondences& c) {
  check_not_collinear(c.src, "source");
  check_not_collinear(c.dst, "target");

  std::array<Point, 4> s, d;
  const NormXform ns = isotropic_norm(c.src, s);
  const NormXform nd = isotropic_norm(c.dst, d);

  // Rows of the 8x9 DLT system; solve via the smallest eigenvector of A^T A.
  double rows[8][9];
  for (int i = 0; i < 4; ++i) {
    const Point& p = s[static_cast<size_t>(i)];
    const Point& q = d[static_cast<size_t>(i)];
    double* r0 = rows[2 * i];
    double* r1 = rows[2 * i + 1];
    const double row0[9] = {p.x, p.y, 1, 0, 0, 0, -q.x * p.x, -q.x * p.y, -q.x};
    const double row1[9] = {0, 0, 0, p.x, p.y, 1, -q.y * p.x, -q.y * p.y, -q.y};
    for (int j = 0; j < 9; ++j) {
      r0[j] = row0[j];
      r1[j] = row1[j];
    }
  }
  std::vector<double> ata(81, 0.0);
  for (int r = 0; r < 8; ++r) {
    for (int i = 0; i < 9; ++i) {
      for (int j = 0; j < 9; ++j) ata[static_cast<size_t>(i) * 9 + j] += rows[r][i] * rows[r][j];
    }
  }
  std::vector<double> w, v;
  linalg::jacobi_eigen_sym(9, ata, w, v);
  int best = 0;
  for (int i = 1; i < 9; ++i) {
    if (w[static_cast<size_t>(i)] < w[static_cast<size_t>(best)]) best = i;
  }
  std::array<double, 9> hn{};
  for (int i = 0; i < 9; ++i) hn[static_cast<size_t>(i)] = v[static_cast<size_t>(i) * 9 + best];

  // Denormalize: H = T_d^-1 * Hn * T_s.
  const std::array<double, 9> ts = {ns.scale, 0, -ns.scale * ns.centroid.x,
                                    0, ns.scale, -ns.scale * ns.centroid.y,
                                    0, 0, 1};
  const std::array<double, 9> tdinv = {1.0 / nd.scale, 0, nd.centroid.x,
                                       0, 1.0 / nd.scale, nd.centroid.y,
                                       0, 0, 1};
  auto mul = [](const std::array<double, 9>& a, const std::array<double, 9>& b) {
    std::array<double, 9> o{};
    for (int r = 0; r < 3; ++r) {
      for (int col = 0; col < 3; ++col) {
        double acc = 0.0;
        for (int k = 0; k < 3; ++k) {
          acc += a[static_cast<size_t>(r) * 3 + k] * b[static_cast<size_t>(k) * 3 + col];
        }
        o[static_cast<size_t>(r) * 3 + col] = acc;
      }
    }
    return o;
  };
  return Homography(mul(mul(tdinv, hn), ts));
}

bool preimage_in_bounds(const Point& p, int src_w, int src_h) {
  return p.x >= 0.0 && p.x <= static_cast<double>(src_w - 1) && p.y >= 0.0 &&
         p.y <= static_cast<double>(src_h - 1);
}

WarpResult warp_image(const Tensor& img, const Homography& h, int out_h,
                      int out_w, float fill) {
  require(img.rank() == 3, "shape", "warp_image wants (C,H,W)");
  const int c = img.dim(0), ih = img.dim(1), iw = img.dim(2);
  const Homography hinv = h.inverse();

  WarpResult res{Tensor({c, out_h, out_w}, fill), Tensor({out_h, out_w}, 0.0f)};
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      Point p;
      if (!hinv.apply_safe({static_cast<double>(x), static_cast<double>(y)}, &p)) continue;
      if (!preimage_in_bounds(p, iw, ih)) continue;
      res.validity_mask.at(y, x) = 1.0f;
      const int x0 = std::min(static_cast<int>(std::floor(p.x)), iw - 1);
      const int y0 = std::min(static_cast<int>(std::floor(p.y)), ih - 1);
      const int x1 = std::min(x0 + 1, iw - 1);
      const int y1 = std::min(y0 + 1, ih - 1);
      const float wx = static_cast<float>(p.x - x0);
      const float wy = static_cast<float>(p.y - y0);
      for (int ch = 0; ch < c; ++ch) {
        const float top = img.at(ch, y0, x0) * (1.0f - wx) + img.at(ch, y0, x1) * wx;
        const float bot = img.at(ch, y1, x0) * (1.0f - wx) + img.at(ch, y1, x1) * wx;
        res.image.at(ch, y, x) = top * (1.0f - wy) + bot * wy;
      }
    }
  }
  return res;
}

Tensor RegionMaskSet::band_complement() const {
  Tensor out({frame, frame}, 0.0f);
  for (int64_t i = 0; i < out.size(); ++i) out[i] = band[i] > 0.5f ? 0.0f : 1.0f;
  return out;
}

void RegionMaskSet::save(const std::filesystem::path& dir) const {
  img::save_pgm(dir / "m1.pgm", m1);
  img::save_pgm(dir / "m2.pgm", m2);
  img::save_pgm(dir / "band.pgm", band);
}

namespace {

// Chebyshev distance from (x,y) to the perimeter pixels of rect (closed pixel
// bounds [x0, x1-1] x [y0, y1-1]).
int dist_to_rect_boundary(const Rect& r, int x, int y) {
  const int bx0 = r.x0, bx1 = r.x1 - 1, by0 = r.y0, by1 = r.y1 - 1;
  const bool inside = x >= bx0 && x <= bx1 && y >= by0 && y <= by1;
  if (!inside) {
    const int dx = x < bx0 ? bx0 - x : (x > bx1 ? x - bx1 : 0);
    const int dy = y < by0 ? by0 - y : (y > by1 ? y - by1 : 0);
    return std::max(dx, dy);
  }
  return std::min(std::min(x - bx0, bx1 - x), std::min(y - by0, by1 - y));
}

}  // namespace

RegionMaskSet make_region_masks(int frame, const Rect& r1, const Rect& r2,
                                int band_width) {
  require(frame > 0, "shape", "frame must be positive");
  for (const Rect* r : {&r1, &r2}) {
    require(r->x0 >= 0 && r->y0 >= 0 && r->x1 <= frame && r->y1 <= frame &&
                r->width() > 0 && r->height() > 0,
            "shape", "region rectangle outside frame");
  }
  const bool overlap = r1.x0 < r2.x1 && r2.x0 < r1.x1 && r1.y0 < r2.y1 && r2.y0 < r1.y1;
  require(!overlap, "shape", "region rectangles overlap");
  require(band_width >= 0, "config", "band width must be >= 0");

  RegionMaskSet ms{Tensor({frame, frame}, 0.0f), Tensor({frame, frame}, 0.0f),
                   Tensor({frame, frame}, 0.0f), frame};
  for (int y = 0; y < frame; ++y) {
    for (int x = 0; x < frame; ++x) {
      if (r1.contains(x, y)) ms.m1.at(y, x) = 1.0f;
      if (r2.contains(x, y)) ms.m2.at(y, x) = 1.0f;
      if (band_width > 0) {
        const int d = std::min(dist_to_rect_boundary(r1, x, y),
                               dist_to_rect_boundary(r2, x, y));
        if (d < band_width) ms.band.at(y, x) = 1.0f;
      }
    }
  }
  return ms;
}

Tensor composite_regions(const Tensor& inpaint, const Tensor& car,
                         const Tensor& warped, const RegionMaskSet& masks) {
  require(inpaint.same_shape(car) && inpaint.same_shape(warped), "shape",
          "composite inputs must share shape");
  require(inpaint.rank() == 3 && inpaint.dim(1) == masks.frame &&
              inpaint.dim(2) == masks.frame,
          "shape", "composite inputs must match mask frame");
  Tensor out = Tensor::zeros_like(inpaint);
  const int c = inpaint.dim(0), h = inpaint.dim(1), w = inpaint.dim(2);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const float m1 = masks.m1.at(y, x);
        const float m2 = masks.m2.at(y, x);
        out.at(ch, y, x) = inpaint.at(ch, y, x) * m1 + car.at(ch, y, x) * m2 +
                           warped.at(ch, y, x) * (1.0f - m1 - m2);
      }
    }
  }
  return out;
}

}  // namespace xv::geo
