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

#include <array>
#include <filesystem>
#include <optional>

#include "xv/core/tensor.hpp"

namespace xv::geo {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// 3x3 projective transform mapping source pixel coordinates to target pixel
// coordinates, normalized so m[2][2] == 1 whenever that entry is nonzero.
class Homography {
 public:
  Homography();  // identity
  explicit Homography(const std::array<double, 9>& row_major);

  double at(int r, int c) const { return m_[static_cast<size_t>(r) * 3 + c]; }
  const std::array<double, 9>& data() const { return m_; }

  Point apply(const Point& p) const;
  // Returns false instead of throwing when the point sits on the line
  // mapped to infinity; per-pixel warp loops use this form.
  bool apply_safe(const Point& p, Point* out) const;
  Homography inverse() const;
  Homography compose(const Homography& rhs) const;  // this ∘ rhs

  double det() const;

  void save(const std::filesystem::path& path) const;  // nine numbers, row-major
  static Homography load(const std::filesystem::path& path);

 private:
  void normalize();
  std::array<double, 9> m_;
};

struct Correspondences {
  std::array<Point, 4> src;
  std::array<Point, 4> dst;

  static Correspondences load(const std::filesystem::path& path);  // sx sy tx ty
  void save(const std::filesystem::path& path) const;
};

// DLT from four correspondences with isotropic (Hartley) point normalization.
// Throws "degenerate" naming the collinear triple when three source or three
// target points are (near-)collinear.
Homography estimate_homography(const Correspondences& c);

struct WarpResult {
  Tensor image;          // (C,H,W)
  Tensor validity_mask;  // (H,W) in {0,1}
};

// Inverse-mapping warp with bilinear interpolation. Output pixel q samples
// img at h^-1(q); when the preimage leaves the source rectangle the pixel is
// set to `fill` and marked invalid.
WarpResult warp_image(const Tensor& img, const Homography& h, int out_h,
                      int out_w, float fill = -1.0f);

// Validity predicate shared by warp_image and the synthetic renderer so both
// views agree exactly on which pixels have an in-bounds preimage.
bool preimage_in_bounds(const Point& p, int src_w, int src_h);

struct Rect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open [x0,x1) x [y0,y1)
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

struct RegionMaskSet {
  Tensor m1;    // (H,W) inpaint region
  Tensor m2;    // (H,W) car region
  Tensor band;  // (H,W) boundary bands
  int frame = 0;

  Tensor band_complement() const;
  void save(const std::filesystem::path& dir) const;  // m1/m2/band as PGM
};

// Axis-aligned region masks plus boundary bands: a pixel is in the band when
// its Chebyshev distance to either rectangle's perimeter pixels is < width,
// so width 0 means no band. Rectangles must be disjoint and inside the frame.
RegionMaskSet make_region_masks(int frame, const Rect& r1, const Rect& r2,
                                int band_width);

// out = inpaint .* M1 + car .* M2 + warped .* (1 - M1 - M2), elementwise,
// masks broadcast across channels.
Tensor composite_regions(const Tensor& inpaint, const Tensor& car,
                         const Tensor& warped, const RegionMaskSet& masks);

}  // namespace xv::geo
