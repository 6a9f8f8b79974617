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

#include <filesystem>
#include <vector>

#include "xv/core/tensor.hpp"

namespace xv::img {

// Images are Tensors of shape (3,H,W) with values in [-1,1]; single-channel
// masks are (H,W) with values {0,1}. On disk: binary PPM (P6) for RGB and
// PGM (P5) for masks — lossless 8-bit rasters.

Tensor load_ppm(const std::filesystem::path& path);
void save_ppm(const std::filesystem::path& path, const Tensor& chw);

Tensor load_pgm(const std::filesystem::path& path);  // (H,W) in {0,1}
void save_pgm(const std::filesystem::path& path, const Tensor& hw);

// 8-bit <-> normalized [-1,1].
inline float to_unit(uint8_t v) { return static_cast<float>(v) / 127.5f - 1.0f; }
uint8_t to_byte(float v);  // clamps, rounds half away from zero

// Maps [-1,1] to [0,255] without quantizing (for metrics on the 8-bit scale).
inline float to_255(float v) {
  float x = (v + 1.0f) * 127.5f;
  if (x < 0.0f) x = 0.0f;
  if (x > 255.0f) x = 255.0f;
  return x;
}

// Bilinear resize of a (C,H,W) tensor; `nearest` keeps exact palette colors
// for segmentation maps.
Tensor resize(const Tensor& chw, int out_h, int out_w, bool nearest = false);

Tensor crop(const Tensor& chw, int x0, int y0, int w, int h);
Tensor hflip(const Tensor& chw);

bool value_range_ok(const Tensor& t, float lo = -1.0f, float hi = 1.0f);

}  // namespace xv::img
