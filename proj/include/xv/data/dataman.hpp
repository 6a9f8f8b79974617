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
#include <optional>
#include <string>
#include <vector>

#include "xv/core/rng.hpp"
#include "xv/core/tensor.hpp"
#include "xv/geometry/geometry.hpp"

namespace xv::data {

struct PaletteEntry {
  std::string name;
  uint8_t r = 0, g = 0, b = 0;
  float fr() const { return static_cast<float>(r) / 127.5f - 1.0f; }
  float fg() const { return static_cast<float>(g) / 127.5f - 1.0f; }
  float fb() const { return static_cast<float>(b) / 127.5f - 1.0f; }
};

struct PaletteSpec {
  std::vector<PaletteEntry> entries;

  static PaletteSpec defaults();
  static PaletteSpec load(const std::filesystem::path& path);  // `name R G B` lines
  void save(const std::filesystem::path& path) const;
  void validate() const;  // colors pairwise distinct
  int index_of(const std::string& name) const;
  // True when every pixel of the (3,H,W) map matches some palette color
  // exactly (after 8-bit quantization).
  bool contains_all_colors(const Tensor& seg) const;
};

// One aligned cross-view sample; all images (3,H,W) in [-1,1], seg colors
// drawn from the palette. scene_class is the synthetic generator's scene
// label (-1 for manifest data without labels).
struct PairedSample {
  Tensor aerial;
  Tensor ground;
  Tensor ground_seg;
  std::optional<Tensor> warped_aerial;
  std::string id;
  int scene_class = -1;
};

struct ManifestRecord {
  std::string id;
  std::string split;  // "train" or "test"
  std::string aerial_path, ground_path, seg_path;
  std::string warped_path;      // "-" or empty when absent
  std::string homography_path;  // per-sample override of the dataset homography
};

struct DatasetManifest {
  std::vector<ManifestRecord> records;
  int crop = 0;     // center-crop of the aerial image (0 = off)
  int resize = 0;   // final square size (0 = keep)
  bool panorama_quarter = false;
  int subsample = 1;
  std::string homography_file;  // relative; empty when absent
  std::string palette_file;
  std::filesystem::path base_dir;

  static DatasetManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  void validate() const;  // split names, disjoint ids, subsample >= 1
};

struct LoadResult {
  std::vector<PairedSample> samples;
  int skipped = 0;  // malformed pairs dropped with a warning
  PaletteSpec palette;
  std::optional<geo::Homography> homography;
};

// Applies the manifest's preprocessing directives and returns samples in id
// order. split_filter: "train", "test", or "" for everything. A missing file
// is fatal and names the path; a within-pair shape mismatch skips the sample.
LoadResult load_dataset(const DatasetManifest& manifest,
                        const std::string& split_filter = "");

// Center crop to crop x crop (must fit), then resize to out x out.
Tensor center_crop_resize(const Tensor& img, int crop, int out,
                          bool nearest = false);

// Keeps indices 0, k, 2k, ... ; k >= 1.
template <typename T>
std::vector<T> subsample_every_kth(const std::vector<T>& xs, int k) {
  require(k >= 1, "config", "subsample stride must be >= 1");
  std::vector<T> out;
  for (size_t i = 0; i < xs.size(); i += static_cast<size_t>(k)) out.push_back(xs[i]);
  return out;
}

// The fixed aerial->ground plane homography the synthetic scenes use.
geo::Homography synth_homography(int size);
// Its defining correspondences (handy for tests and estimation demos).
geo::Correspondences synth_correspondences(int size);

int synth_num_classes();
std::string synth_class_name(int cls);

// Procedural paired scene: top-down aerial plane (roads, sidewalks, building
// footprints, trees, lane markers), ground view derived through the plane
// homography plus a sky band and a fixed car hood, exact segmentation map.
// Deterministic in (seed, size); size 64 or 256. All tensors are snapped to
// the 8-bit grid so a write/load round trip is pixel-identical.
PairedSample synth_scene(uint64_t seed, int size);

struct AugmentParams {
  int dx = 0, dy = 0;  // jitter crop offsets in [0, 2*jitter]
  bool flip = false;
  bool jitter = true;
  int jitter_px = 30;
};

// Jitter (upscale by jitter_px then crop back) and horizontal flip, applied
// consistently to every image in the sample. Segmentation maps move with
// nearest-neighbor sampling so palette colors stay exact.
PairedSample augment_with(const PairedSample& s, const AugmentParams& p);
PairedSample augment(const PairedSample& s, uint64_t seed, int jitter_px = 30);

// Writes the on-disk layout (images/, manifest.txt, palette.txt,
// homography.txt, labels.txt) the CLI and loaders share.
void write_dataset(const std::filesystem::path& dir,
                   const std::vector<PairedSample>& samples,
                   const std::vector<std::string>& splits,
                   const PaletteSpec& palette,
                   const std::optional<geo::Homography>& h);

}  // namespace xv::data
