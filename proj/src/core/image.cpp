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

#include "xv/core/image.hpp"

#include <cmath>
#include <fstream>
#include <string>

namespace xv::img {

namespace {

// Reads one PNM header token, skipping whitespace and '#' comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

void read_pnm_header(std::istream& in, const std::string& magic,
                     const std::filesystem::path& path, int& w, int& h) {
  require(pnm_token(in) == magic, "io",
          "not a " + magic + " file: " + path.string());
  w = std::stoi(pnm_token(in));
  h = std::stoi(pnm_token(in));
  const int maxval = std::stoi(pnm_token(in));
  require(maxval == 255, "io", "expected maxval 255 in " + path.string());
  require(w > 0 && h > 0, "io", "bad raster size in " + path.string());
}

}  // namespace

uint8_t to_byte(float v) {
  float x = (v + 1.0f) * 127.5f;
  if (x < 0.0f) x = 0.0f;
  if (x > 255.0f) x = 255.0f;
  return static_cast<uint8_t>(std::lround(x));
}

Tensor load_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "io", "cannot open image: " + path.string());
  int w = 0, h = 0;
  read_pnm_header(in, "P6", path, w, h);
  std::vector<unsigned char> buf(static_cast<size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  require(in.gcount() == static_cast<std::streamsize>(buf.size()), "io",
          "truncated image: " + path.string());
  Tensor t({3, h, w});
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t p = (static_cast<size_t>(y) * w + x) * 3;
      for (int c = 0; c < 3; ++c) t.at(c, y, x) = to_unit(buf[p + c]);
    }
  }
  return t;
}

void save_ppm(const std::filesystem::path& path, const Tensor& chw) {
  require(chw.rank() == 3 && chw.dim(0) == 3, "shape",
          "save_ppm wants a (3,H,W) tensor, got " + chw.shape_str());
  const int h = chw.dim(1), w = chw.dim(2);
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "io", "cannot write image: " + path.string());
  out << "P6\n" << w << " " << h << "\n255\n";
  std::vector<unsigned char> buf(static_cast<size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t p = (static_cast<size_t>(y) * w + x) * 3;
      for (int c = 0; c < 3; ++c) buf[p + c] = to_byte(chw.at(c, y, x));
    }
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  require(out.good(), "io", "short write: " + path.string());
}

Tensor load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "io", "cannot open mask: " + path.string());
  int w = 0, h = 0;
  read_pnm_header(in, "P5", path, w, h);
  std::vector<unsigned char> buf(static_cast<size_t>(w) * h);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  require(in.gcount() == static_cast<std::streamsize>(buf.size()), "io",
          "truncated mask: " + path.string());
  Tensor t({h, w});
  for (int64_t i = 0; i < t.size(); ++i) t[i] = buf[static_cast<size_t>(i)] >= 128 ? 1.0f : 0.0f;
  return t;
}

void save_pgm(const std::filesystem::path& path, const Tensor& hw) {
  require(hw.rank() == 2, "shape", "save_pgm wants (H,W), got " + hw.shape_str());
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "io", "cannot write mask: " + path.string());
  out << "P5\n" << hw.dim(1) << " " << hw.dim(0) << "\n255\n";
  std::vector<unsigned char> buf(static_cast<size_t>(hw.size()));
  for (int64_t i = 0; i < hw.size(); ++i) buf[static_cast<size_t>(i)] = hw[i] > 0.5f ? 255 : 0;
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  require(out.good(), "io", "short write: " + path.string());
}

Tensor resize(const Tensor& chw, int out_h, int out_w, bool nearest) {
  require(chw.rank() == 3, "shape", "resize wants (C,H,W)");
  const int c = chw.dim(0), h = chw.dim(1), w = chw.dim(2);
  if (h == out_h && w == out_w) return chw;
  Tensor out({c, out_h, out_w});
  const float sy = static_cast<float>(h) / static_cast<float>(out_h);
  const float sx = static_cast<float>(w) / static_cast<float>(out_w);
  for (int y = 0; y < out_h; ++y) {
    // Pixel-center mapping keeps resizes alignment-symmetric.
    const float fy = (static_cast<float>(y) + 0.5f) * sy - 0.5f;
    for (int x = 0; x < out_w; ++x) {
      const float fx = (static_cast<float>(x) + 0.5f) * sx - 0.5f;
      if (nearest) {
        int iy = static_cast<int>(std::lround(fy));
        int ix = static_cast<int>(std::lround(fx));
        iy = std::min(std::max(iy, 0), h - 1);
        ix = std::min(std::max(ix, 0), w - 1);
        for (int ch = 0; ch < c; ++ch) out.at(ch, y, x) = chw.at(ch, iy, ix);
      } else {
        int y0 = static_cast<int>(std::floor(fy));
        int x0 = static_cast<int>(std::floor(fx));
        const float wy = fy - static_cast<float>(y0);
        const float wx = fx - static_cast<float>(x0);
        const int y1 = std::min(std::max(y0 + 1, 0), h - 1);
        const int x1 = std::min(std::max(x0 + 1, 0), w - 1);
        y0 = std::min(std::max(y0, 0), h - 1);
        x0 = std::min(std::max(x0, 0), w - 1);
        for (int ch = 0; ch < c; ++ch) {
          const float top = chw.at(ch, y0, x0) * (1.0f - wx) + chw.at(ch, y0, x1) * wx;
          const float bot = chw.at(ch, y1, x0) * (1.0f - wx) + chw.at(ch, y1, x1) * wx;
          out.at(ch, y, x) = top * (1.0f - wy) + bot * wy;
        }
      }
    }
  }
  return out;
}

Tensor crop(const Tensor& chw, int x0, int y0, int w, int h) {
  require(chw.rank() == 3, "shape", "crop wants (C,H,W)");
  require(x0 >= 0 && y0 >= 0 && x0 + w <= chw.dim(2) && y0 + h <= chw.dim(1),
          "shape", "crop window exceeds image extent");
  Tensor out({chw.dim(0), h, w});
  for (int c = 0; c < chw.dim(0); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) out.at(c, y, x) = chw.at(c, y0 + y, x0 + x);
    }
  }
  return out;
}

Tensor hflip(const Tensor& chw) {
  Tensor out = chw;
  const int c = chw.dim(0), h = chw.dim(1), w = chw.dim(2);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) out.at(ch, y, x) = chw.at(ch, y, w - 1 - x);
    }
  }
  return out;
}

bool value_range_ok(const Tensor& t, float lo, float hi) {
  for (int64_t i = 0; i < t.size(); ++i) {
    if (!(t[i] >= lo && t[i] <= hi)) return false;
  }
  return true;
}

}  // namespace xv::img
