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

#include "xv/data/dataman.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "xv/core/image.hpp"

namespace xv::data {

namespace {

float snap8(float v) { return img::to_unit(img::to_byte(v)); }

void snap_tensor(Tensor& t) {
  for (int64_t i = 0; i < t.size(); ++i) t[i] = snap8(t[i]);
}

}  // namespace

// -------------------------------------------------------------- palette ----

PaletteSpec PaletteSpec::defaults() {
  PaletteSpec p;
  p.entries = {
      {"road", 105, 105, 105},    {"sidewalk", 244, 164, 96},
      {"building", 178, 34, 34},  {"vegetation", 34, 139, 34},
      {"sky", 135, 206, 235},     {"car", 25, 25, 112},
      {"void", 0, 0, 0},
  };
  return p;
}

PaletteSpec PaletteSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "io", "cannot open palette: " + path.string());
  PaletteSpec p;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    PaletteEntry e;
    int r, g, b;
    require(static_cast<bool>(ls >> e.name >> r >> g >> b), "io",
            "palette lines must be `name R G B`: " + path.string());
    e.r = static_cast<uint8_t>(r);
    e.g = static_cast<uint8_t>(g);
    e.b = static_cast<uint8_t>(b);
    p.entries.push_back(e);
  }
  p.validate();
  return p;
}

void PaletteSpec::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  require(out.good(), "io", "cannot write palette: " + path.string());
  for (const auto& e : entries) {
    out << e.name << " " << static_cast<int>(e.r) << " " << static_cast<int>(e.g)
        << " " << static_cast<int>(e.b) << "\n";
  }
}

void PaletteSpec::validate() const {
  require(!entries.empty(), "config", "palette is empty");
  for (size_t i = 0; i < entries.size(); ++i) {
    for (size_t j = i + 1; j < entries.size(); ++j) {
      require(entries[i].r != entries[j].r || entries[i].g != entries[j].g ||
                  entries[i].b != entries[j].b,
              "config", "palette colors must be pairwise distinct: " +
                            entries[i].name + " vs " + entries[j].name);
    }
  }
}

int PaletteSpec::index_of(const std::string& name) const {
  for (size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].name == name) return static_cast<int>(i);
  }
  fail("config", "unknown palette class: " + name);
}

bool PaletteSpec::contains_all_colors(const Tensor& seg) const {
  require(seg.rank() == 3 && seg.dim(0) == 3, "shape", "segmap must be (3,H,W)");
  std::set<uint32_t> colors;
  for (const auto& e : entries) {
    colors.insert((static_cast<uint32_t>(e.r) << 16) | (static_cast<uint32_t>(e.g) << 8) | e.b);
  }
  const int h = seg.dim(1), w = seg.dim(2);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const uint32_t key = (static_cast<uint32_t>(img::to_byte(seg.at(0, y, x))) << 16) |
                           (static_cast<uint32_t>(img::to_byte(seg.at(1, y, x))) << 8) |
                           img::to_byte(seg.at(2, y, x));
      if (colors.find(key) == colors.end()) return false;
    }
  }
  return true;
}

// ------------------------------------------------------------- manifest ----

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "io", "cannot open manifest: " + path.string());
  DatasetManifest m;
  m.base_dir = path.parent_path();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    if (line[0] == '@') {
      std::string key;
      ls >> key;
      if (key == "@crop") ls >> m.crop;
      else if (key == "@resize") ls >> m.resize;
      else if (key == "@panorama_quarter") { int v = 0; ls >> v; m.panorama_quarter = v != 0; }
      else if (key == "@subsample") ls >> m.subsample;
      else if (key == "@homography") ls >> m.homography_file;
      else if (key == "@palette") ls >> m.palette_file;
      else fail("config", "unknown manifest directive at line " + std::to_string(lineno) + ": " + key);
      continue;
    }
    ManifestRecord r;
    require(static_cast<bool>(ls >> r.id >> r.split >> r.aerial_path >> r.ground_path >> r.seg_path),
            "io", "manifest record needs `id split aerial ground seg [warped] [homography]` at line " +
                      std::to_string(lineno));
    if (!(ls >> r.warped_path)) r.warped_path.clear();
    if (r.warped_path == "-") r.warped_path.clear();
    if (!(ls >> r.homography_path)) r.homography_path.clear();
    if (r.homography_path == "-") r.homography_path.clear();
    m.records.push_back(std::move(r));
  }
  m.validate();
  return m;
}

void DatasetManifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  require(out.good(), "io", "cannot write manifest: " + path.string());
  out << "# crossview dataset manifest\n";
  out << "@crop " << crop << "\n@resize " << resize << "\n@panorama_quarter "
      << (panorama_quarter ? 1 : 0) << "\n@subsample " << subsample << "\n";
  if (!homography_file.empty()) out << "@homography " << homography_file << "\n";
  if (!palette_file.empty()) out << "@palette " << palette_file << "\n";
  for (const auto& r : records) {
    out << r.id << " " << r.split << " " << r.aerial_path << " " << r.ground_path
        << " " << r.seg_path << " " << (r.warped_path.empty() ? "-" : r.warped_path);
    if (!r.homography_path.empty()) out << " " << r.homography_path;
    out << "\n";
  }
}

void DatasetManifest::validate() const {
  require(subsample >= 1, "config", "@subsample must be >= 1");
  require(crop >= 0 && resize >= 0, "config", "@crop/@resize must be >= 0");
  std::map<std::string, std::string> split_of;
  for (const auto& r : records) {
    require(r.split == "train" || r.split == "test", "config",
            "record split must be train or test: " + r.id);
    auto it = split_of.find(r.id);
    require(it == split_of.end(), "config", "duplicate sample id in manifest: " + r.id);
    split_of[r.id] = r.split;
  }
}

// --------------------------------------------------------------- loader ----

Tensor center_crop_resize(const Tensor& img_t, int crop, int out, bool nearest) {
  require(img_t.rank() == 3, "shape", "center_crop_resize wants (C,H,W)");
  const int h = img_t.dim(1), w = img_t.dim(2);
  require(crop > 0 && out > 0, "config", "crop and out must be positive");
  require(crop <= std::min(h, w), "shape",
          "crop " + std::to_string(crop) + " exceeds image extent " +
              std::to_string(std::min(h, w)));
  const Tensor c = img::crop(img_t, (w - crop) / 2, (h - crop) / 2, crop, crop);
  return img::resize(c, out, out, nearest);
}

namespace {

Tensor load_and_preprocess(const std::filesystem::path& path,
                           const DatasetManifest& m, bool is_aerial,
                           bool nearest) {
  Tensor t = img::load_ppm(path);
  if (!is_aerial && m.panorama_quarter) {
    // Leftmost quarter of the panorama strip, full height.
    const int q = t.dim(2) / 4;
    require(q > 0, "shape", "panorama too narrow: " + path.string());
    t = img::crop(t, 0, 0, q, t.dim(1));
  }
  if (is_aerial && m.crop > 0) {
    t = center_crop_resize(t, m.crop, m.resize > 0 ? m.resize : m.crop, nearest);
  } else if (m.resize > 0) {
    t = img::resize(t, m.resize, m.resize, nearest);
  }
  return t;
}

}  // namespace

LoadResult load_dataset(const DatasetManifest& manifest, const std::string& split_filter) {
  manifest.validate();
  LoadResult res;
  res.palette = manifest.palette_file.empty()
                    ? PaletteSpec::defaults()
                    : PaletteSpec::load(manifest.base_dir / manifest.palette_file);
  if (!manifest.homography_file.empty()) {
    res.homography = geo::Homography::load(manifest.base_dir / manifest.homography_file);
  }

  std::vector<ManifestRecord> recs = manifest.records;
  std::sort(recs.begin(), recs.end(),
            [](const ManifestRecord& a, const ManifestRecord& b) { return a.id < b.id; });
  if (!split_filter.empty()) {
    std::vector<ManifestRecord> filtered;
    for (auto& r : recs) {
      if (r.split == split_filter) filtered.push_back(r);
    }
    recs = std::move(filtered);
  }
  recs = subsample_every_kth(recs, manifest.subsample);

  for (const auto& r : recs) {
    for (const std::string* p : {&r.aerial_path, &r.ground_path, &r.seg_path}) {
      const auto full = manifest.base_dir / *p;
      require(std::filesystem::exists(full), "io",
              "dataset file missing: " + full.string() + " (sample " + r.id + ")");
    }
    PairedSample s;
    s.id = r.id;
    s.aerial = load_and_preprocess(manifest.base_dir / r.aerial_path, manifest, true, false);
    s.ground = load_and_preprocess(manifest.base_dir / r.ground_path, manifest, false, false);
    s.ground_seg = load_and_preprocess(manifest.base_dir / r.seg_path, manifest, false, true);
    if (!r.warped_path.empty()) {
      const auto wfull = manifest.base_dir / r.warped_path;
      require(std::filesystem::exists(wfull), "io",
              "dataset file missing: " + wfull.string() + " (sample " + r.id + ")");
      s.warped_aerial = load_and_preprocess(wfull, manifest, false, false);
    } else if (!r.homography_path.empty()) {
      // Per-sample homography override of the dataset-wide matrix.
      const geo::Homography hs = geo::Homography::load(manifest.base_dir / r.homography_path);
      s.warped_aerial = geo::warp_image(s.aerial, hs, s.aerial.dim(1), s.aerial.dim(2)).image;
    } else if (res.homography) {
      s.warped_aerial =
          geo::warp_image(s.aerial, *res.homography, s.aerial.dim(1), s.aerial.dim(2)).image;
    }
    const bool ok = s.aerial.same_shape(s.ground) && s.aerial.same_shape(s.ground_seg) &&
                    (!s.warped_aerial || s.aerial.same_shape(*s.warped_aerial));
    if (!ok) {
      std::cerr << "warning: skipping sample " << r.id << ": shape mismatch (aerial "
                << s.aerial.shape_str() << ", ground " << s.ground.shape_str()
                << ", seg " << s.ground_seg.shape_str() << ")\n";
      ++res.skipped;
      continue;
    }
    res.samples.push_back(std::move(s));
  }
  if (res.skipped > 0) {
    std::cerr << "warning: " << res.skipped << " sample(s) skipped during load\n";
  }
  return res;
}

// ------------------------------------------------------ synthetic scenes ----

namespace {

// The scene lives on the aerial pixel plane. Colors are [-1,1] RGB; classes
// index the default palette. Soft color edges (~1.5 px) keep the analytic
// ground render and the raster warp within interpolation error of each
// other; class boundaries stay hard so segmentation maps are exact.
struct Shape {
  enum Kind { kVStrip, kRect, kDisc } kind = kRect;
  float x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // strip/rect bounds; disc center+radius
  float cx = 0, cy = 0, r = 0;
  int cls = 0;
  float shade = 1.0f;  // image-only brightness factor

  float sdf(float x, float y) const {
    switch (kind) {
      case kVStrip:
        return std::max(x0 - x, x - x1);
      case kRect: {
        const float dx = std::max({x0 - x, x - x1, 0.0f});
        const float dy = std::max({y0 - y, y - y1, 0.0f});
        const float outside = std::sqrt(dx * dx + dy * dy);
        const float inside = std::min(std::min(x - x0, x1 - x), std::min(y - y0, y1 - y));
        return outside > 0.0f ? outside : -inside;
      }
      case kDisc:
        return std::hypot(x - cx, y - cy) - r;
    }
    return 1e9f;
  }
};

struct SceneSpec {
  int size = 0;
  std::vector<Shape> shapes;  // painter order, later on top
  float base_shade = 1.0f;
  int scene_class = 0;
};

constexpr int kClsRoad = 0, kClsSidewalk = 1, kClsBuilding = 2, kClsVegetation = 3,
              kClsSky = 4, kClsCar = 5, kClsVoid = 6;

void palette_color(const PaletteSpec& p, int cls, float shade, float rgb[3]) {
  const PaletteEntry& e = p.entries[static_cast<size_t>(cls)];
  const float raw[3] = {e.fr(), e.fg(), e.fb()};
  for (int i = 0; i < 3; ++i) {
    // Shade scales the 8-bit intensity, not the normalized value.
    float v = (raw[i] + 1.0f) * shade - 1.0f;
    rgb[i] = std::min(std::max(v, -1.0f), 1.0f);
  }
}

SceneSpec make_scene_spec(uint64_t seed, int size) {
  SceneSpec sc;
  sc.size = size;
  const float S = static_cast<float>(size);
  Rng rng(derive_seed(seed, 0x7363656eULL));

  const bool buildings = rng.bernoulli(0.5);
  const bool dense_trees = rng.bernoulli(0.5);
  const bool markers = rng.bernoulli(0.5);
  sc.scene_class = (buildings ? 1 : 0) | (dense_trees ? 2 : 0) | (markers ? 4 : 0);

  sc.base_shade = 0.9f + 0.2f * static_cast<float>(rng.uniform());

  // Road layout varies per scene so the ground view actually depends on the
  // conditioning image rather than on a dataset-wide mean layout. The plane
  // homography itself is dataset-fixed and road-independent.
  const float road_cx = (0.40f + 0.20f * static_cast<float>(rng.uniform())) * S;
  const float road_w = (0.30f + 0.16f * static_cast<float>(rng.uniform())) * S;
  const float rl = road_cx - 0.5f * road_w;
  const float rr = road_cx + 0.5f * road_w;
  const float walk_w = 0.05f * S;
  Shape road{Shape::kVStrip, rl, 0, rr, 0, 0, 0, 0, kClsRoad,
             0.9f + 0.2f * static_cast<float>(rng.uniform())};
  Shape walk_l{Shape::kVStrip, rl - walk_w, 0, rl, 0, 0, 0, 0, kClsSidewalk, 1.0f};
  Shape walk_r{Shape::kVStrip, rr, 0, rr + walk_w, 0, 0, 0, 0, kClsSidewalk, 1.0f};
  sc.shapes.push_back(walk_l);
  sc.shapes.push_back(walk_r);
  sc.shapes.push_back(road);

  if (markers) {
    // Dashed center line: bright paint, still road class.
    const float dash = 0.0625f * S;
    const float half = 0.011f * S;
    for (float y = 0.45f * S; y + dash < S; y += 2 * dash) {
      Shape m{Shape::kRect, road_cx - half, y, road_cx + half, y + dash, 0, 0, 0,
              kClsRoad, 2.2f};
      sc.shapes.push_back(m);
    }
  }
  const float left_field = rl - walk_w;
  const float right_field = rr + walk_w;
  if (buildings) {
    const int n_per_side = 2;
    for (int side = 0; side < 2; ++side) {
      for (int i = 0; i < n_per_side; ++i) {
        const float bw = (0.08f + 0.07f * static_cast<float>(rng.uniform())) * S;
        const float bh = (0.10f + 0.08f * static_cast<float>(rng.uniform())) * S;
        const float lo = side == 0 ? 0.02f * S : right_field + 0.01f * S;
        const float hi = (side == 0 ? left_field - 0.01f * S : 0.98f * S) - bw;
        if (hi <= lo) continue;
        const float bx = lo + (hi - lo) * static_cast<float>(rng.uniform());
        // Near field only: the far plane stays smooth for the warp.
        const float by = (0.50f + 0.35f * static_cast<float>(rng.uniform())) * S;
        Shape b{Shape::kRect, bx, by, bx + bw, by + bh, 0, 0, 0, kClsBuilding,
                0.8f + 0.4f * static_cast<float>(rng.uniform())};
        sc.shapes.push_back(b);
      }
    }
  }
  {
    const int n_trees = dense_trees ? 10 : 3;
    for (int i = 0; i < n_trees; ++i) {
      const int side = rng.uniform_int(0, 1);
      const float span_l = std::max(0.0f, left_field - 0.02f * S);
      const float tx = side == 0
                           ? 0.02f * S + std::max(0.0f, span_l - 0.02f * S) *
                                             static_cast<float>(rng.uniform())
                           : right_field +
                                 (0.98f * S - right_field) * static_cast<float>(rng.uniform());
      const float ty = (0.48f + 0.48f * static_cast<float>(rng.uniform())) * S;
      const float tr = (0.02f + 0.03f * static_cast<float>(rng.uniform())) * S;
      Shape t{Shape::kDisc, 0, 0, 0, 0, tx, ty, tr, kClsVegetation,
              0.55f + 0.2f * static_cast<float>(rng.uniform())};
      sc.shapes.push_back(t);
    }
  }
  return sc;
}

void scene_eval(const SceneSpec& sc, const PaletteSpec& pal, float x, float y,
                float rgb[3], int* cls) {
  const float soft = 1.5f;
  float base[3];
  palette_color(pal, kClsVegetation, sc.base_shade, base);
  rgb[0] = base[0];
  rgb[1] = base[1];
  rgb[2] = base[2];
  *cls = kClsVegetation;
  for (const Shape& sh : sc.shapes) {
    const float d = sh.sdf(x, y);
    const float cov = std::min(std::max(0.5f - d / soft, 0.0f), 1.0f);
    if (cov <= 0.0f) continue;
    float col[3];
    palette_color(pal, sh.cls, sh.shade, col);
    for (int i = 0; i < 3; ++i) rgb[i] = rgb[i] * (1.0f - cov) + col[i] * cov;
    if (cov >= 0.5f) *cls = sh.cls;
  }
}

}  // namespace

geo::Correspondences synth_correspondences(int size) {
  const double S = static_cast<double>(size);
  geo::Correspondences c;
  c.src = {geo::Point{0.30 * S, 0.95 * S}, geo::Point{0.70 * S, 0.95 * S},
           geo::Point{0.30 * S, 0.15 * S}, geo::Point{0.70 * S, 0.15 * S}};
  c.dst = {geo::Point{0.05 * S, 0.95 * S}, geo::Point{0.95 * S, 0.95 * S},
           geo::Point{0.44 * S, 0.47 * S}, geo::Point{0.56 * S, 0.47 * S}};
  return c;
}

geo::Homography synth_homography(int size) {
  return geo::estimate_homography(synth_correspondences(size));
}

int synth_num_classes() { return 8; }

std::string synth_class_name(int cls) {
  require(cls >= 0 && cls < 8, "config", "scene class out of range");
  std::string name;
  name += (cls & 1) ? "built" : "open";
  name += (cls & 2) ? "-dense" : "-sparse";
  name += (cls & 4) ? "-marked" : "-plain";
  return name;
}

PairedSample synth_scene(uint64_t seed, int size) {
  require(size == 64 || size == 256, "config", "synthetic scene size must be 64 or 256");
  const PaletteSpec pal = PaletteSpec::defaults();
  const SceneSpec sc = make_scene_spec(seed, size);
  const geo::Homography h = synth_homography(size);
  const geo::Homography hinv = h.inverse();

  const int horizon = static_cast<int>(std::lround(0.45 * size));
  const geo::Rect hood{size / 4, (size * 23) / 32, (size * 3) / 4, size};

  PairedSample s;
  {
    // Zero-padded so lexicographic id order matches numeric seed order.
    std::ostringstream os;
    os << "s";
    os.width(6);
    os.fill('0');
    os << seed;
    s.id = os.str();
  }
  s.scene_class = sc.scene_class;
  s.aerial = Tensor({3, size, size});
  s.ground = Tensor({3, size, size});
  s.ground_seg = Tensor({3, size, size});

  float rgb[3];
  int cls = 0;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      scene_eval(sc, pal, static_cast<float>(x), static_cast<float>(y), rgb, &cls);
      for (int c = 0; c < 3; ++c) s.aerial.at(c, y, x) = rgb[c];
    }
  }

  float sky_col[3], car_col[3], void_col[3];
  palette_color(pal, kClsSky, 1.0f, sky_col);
  palette_color(pal, kClsCar, 1.0f, car_col);
  palette_color(pal, kClsVoid, 1.0f, void_col);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      int pix_cls;
      float pix[3];
      if (y < horizon) {
        // Sky brightens toward the horizon.
        const float t = static_cast<float>(y) / std::max(1.0f, static_cast<float>(horizon));
        for (int c = 0; c < 3; ++c) pix[c] = sky_col[c] + (1.0f - sky_col[c]) * 0.35f * t;
        pix_cls = kClsSky;
      } else {
        geo::Point p;
        const bool finite_preimage =
            hinv.apply_safe({static_cast<double>(x), static_cast<double>(y)}, &p);
        if (finite_preimage && geo::preimage_in_bounds(p, size, size)) {
          scene_eval(sc, pal, static_cast<float>(p.x), static_cast<float>(p.y), pix, &pix_cls);
        } else {
          pix[0] = void_col[0];
          pix[1] = void_col[1];
          pix[2] = void_col[2];
          pix_cls = kClsVoid;
        }
      }
      if (hood.contains(x, y)) {
        const float t = static_cast<float>(y - hood.y0) /
                        std::max(1.0f, static_cast<float>(hood.height()));
        for (int c = 0; c < 3; ++c) pix[c] = car_col[c] * (0.8f + 0.2f * t) + 0.0f;
        pix_cls = kClsCar;
      }
      for (int c = 0; c < 3; ++c) s.ground.at(c, y, x) = pix[c];
      const PaletteEntry& pe = pal.entries[static_cast<size_t>(pix_cls)];
      s.ground_seg.at(0, y, x) = pe.fr();
      s.ground_seg.at(1, y, x) = pe.fg();
      s.ground_seg.at(2, y, x) = pe.fb();
    }
  }

  snap_tensor(s.aerial);
  snap_tensor(s.ground);
  snap_tensor(s.ground_seg);
  Tensor warped = geo::warp_image(s.aerial, h, size, size).image;
  snap_tensor(warped);
  s.warped_aerial = std::move(warped);
  return s;
}

// ------------------------------------------------------------ augment ----

namespace {

Tensor jitter_one(const Tensor& t, int jitter_px, int dx, int dy, bool nearest) {
  const int h = t.dim(1), w = t.dim(2);
  const Tensor up = img::resize(t, h + jitter_px, w + jitter_px, nearest);
  return img::crop(up, dx, dy, w, h);
}

}  // namespace

PairedSample augment_with(const PairedSample& s, const AugmentParams& p) {
  PairedSample out = s;
  auto apply = [&](const Tensor& t, bool nearest) {
    Tensor r = t;
    if (p.jitter && p.jitter_px > 0) r = jitter_one(r, p.jitter_px, p.dx, p.dy, nearest);
    if (p.flip) r = img::hflip(r);
    return r;
  };
  out.aerial = apply(s.aerial, false);
  out.ground = apply(s.ground, false);
  out.ground_seg = apply(s.ground_seg, true);
  if (s.warped_aerial) out.warped_aerial = apply(*s.warped_aerial, false);
  return out;
}

PairedSample augment(const PairedSample& s, uint64_t seed, int jitter_px) {
  Rng rng(derive_seed(seed, 0x6175676dULL));
  AugmentParams p;
  p.jitter_px = jitter_px;
  p.dx = rng.uniform_int(0, jitter_px);
  p.dy = rng.uniform_int(0, jitter_px);
  p.flip = rng.bernoulli(0.5);
  return augment_with(s, p);
}

// -------------------------------------------------------------- writer ----

void write_dataset(const std::filesystem::path& dir,
                   const std::vector<PairedSample>& samples,
                   const std::vector<std::string>& splits,
                   const PaletteSpec& palette,
                   const std::optional<geo::Homography>& h) {
  require(splits.size() == samples.size(), "config",
          "write_dataset: one split per sample");
  std::filesystem::create_directories(dir / "images");
  palette.save(dir / "palette.txt");
  if (h) h->save(dir / "homography.txt");

  DatasetManifest m;
  m.base_dir = dir;
  if (h) m.homography_file = "homography.txt";
  m.palette_file = "palette.txt";

  std::ofstream labels(dir / "labels.txt");
  require(labels.good(), "io", "cannot write labels");
  for (size_t i = 0; i < samples.size(); ++i) {
    const PairedSample& s = samples[i];
    const std::string base = "images/" + s.id;
    img::save_ppm(dir / (base + "_a.ppm"), s.aerial);
    img::save_ppm(dir / (base + "_g.ppm"), s.ground);
    img::save_ppm(dir / (base + "_s.ppm"), s.ground_seg);
    ManifestRecord r;
    r.id = s.id;
    r.split = splits[i];
    r.aerial_path = base + "_a.ppm";
    r.ground_path = base + "_g.ppm";
    r.seg_path = base + "_s.ppm";
    if (s.warped_aerial) {
      img::save_ppm(dir / (base + "_w.ppm"), *s.warped_aerial);
      r.warped_path = base + "_w.ppm";
    }
    m.records.push_back(std::move(r));
    if (s.scene_class >= 0) {
      labels << s.id << " " << s.scene_class << " " << synth_class_name(s.scene_class)
             << "\n";
    }
  }
  m.save(dir / "manifest.txt");
}

}  // namespace xv::data
