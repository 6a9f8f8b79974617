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

#include "xv/cli/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "xv/core/image.hpp"
#include "xv/data/dataman.hpp"
#include "xv/metrics/classifier.hpp"
#include "xv/metrics/metrics.hpp"
#include "xv/train/trainer.hpp"

namespace xv::cli {

namespace fs = std::filesystem;

namespace {

// Every subcommand drops its resolved configuration beside its outputs so a
// run is reproducible from the snapshot alone.
void write_snapshot(const fs::path& out_dir, const std::string& subcommand,
                    const std::map<std::string, std::string>& kv) {
  fs::create_directories(out_dir);
  std::ofstream out(out_dir / "run-config.txt");
  require(out.good(), "io", "cannot write run-config.txt under " + out_dir.string());
  out << "subcommand=" << subcommand << "\n";
  for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
}

std::vector<fs::path> list_ppm(const fs::path& dir) {
  require(fs::is_directory(dir), "io", "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".ppm") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  require(!files.empty(), "io", "no .ppm images under " + dir.string());
  return files;
}

std::vector<Tensor> load_images(const std::vector<fs::path>& files) {
  std::vector<Tensor> out;
  for (const auto& f : files) out.push_back(img::load_ppm(f));
  return out;
}

data::LoadResult load_dataset_dir(const fs::path& dir, const std::string& split) {
  const fs::path manifest = dir / "manifest.txt";
  require(fs::exists(manifest), "io", "no manifest.txt under " + dir.string());
  return data::load_dataset(data::DatasetManifest::load(manifest), split);
}

geo::Rect parse_rect(const std::string& s) {
  geo::Rect r;
  char c1, c2, c3;
  std::istringstream in(s);
  require(static_cast<bool>(in >> r.x0 >> c1 >> r.y0 >> c2 >> r.x1 >> c3 >> r.y1) &&
              c1 == ',' && c2 == ',' && c3 == ',',
          "config", "rectangles are x0,y0,x1,y1: " + s);
  return r;
}

void apply_preset(train::TrainConfig& cfg, const std::string& preset) {
  if (preset.empty()) return;
  if (preset == "overfit8") {
    cfg.resolution = 64;
    cfg.steps = 200;
    cfg.batch_size = 1;
    cfg.epochs = 0;
    cfg.augment = false;
    cfg.sub1_steps = 200;
    cfg.sub2_steps = 200;
    cfg.sub3_steps = 600;
    // The memorization smokes converge faster at 4e-4; the h-regions realism
    // equilibrium prefers the base 2e-4 (higher rates strengthen D too much).
    if (cfg.method != "h-regions") cfg.lr = 4e-4;
  } else if (preset == "desk64") {
    cfg.resolution = 64;
    cfg.steps = 600;
    cfg.batch_size = 1;
    cfg.epochs = 0;
    cfg.augment = false;
    cfg.skip_connections = true;  // the directional desk comparison setting
  } else if (preset == "desk256") {
    cfg.resolution = 256;
    cfg.steps = 60;
    cfg.batch_size = 1;
    cfg.epochs = 0;
    cfg.augment = false;
  } else {
    fail("config", "unknown preset: " + preset);
  }
}

// ------------------------------------------------------------ subcommands ---

struct SynthDataArgs {
  int n = 16;
  int n_test = 0;
  uint64_t seed = 0;
  int size = 64;
  std::string out;
};

int cmd_synth_data(const SynthDataArgs& a) {
  require(a.n > 0 && a.n_test >= 0, "config", "--n must be positive");
  const fs::path out(a.out);
  std::vector<data::PairedSample> samples;
  std::vector<std::string> splits;
  for (int i = 0; i < a.n + a.n_test; ++i) {
    samples.push_back(data::synth_scene(a.seed + static_cast<uint64_t>(i), a.size));
    splits.push_back(i < a.n ? "train" : "test");
  }
  data::write_dataset(out, samples, splits, data::PaletteSpec::defaults(),
                      data::synth_homography(a.size));
  write_snapshot(out, "synth-data",
                 {{"n", std::to_string(a.n)},
                  {"n_test", std::to_string(a.n_test)},
                  {"seed", std::to_string(a.seed)},
                  {"size", std::to_string(a.size)}});
  std::cout << "wrote " << samples.size() << " samples to " << out.string() << "\n";
  return 0;
}

struct PrepareArgs {
  std::string manifest;
  std::string out;
};

int cmd_prepare_data(const PrepareArgs& a) {
  const data::DatasetManifest m = data::DatasetManifest::load(a.manifest);
  data::LoadResult res = data::load_dataset(m);
  std::vector<std::string> splits;
  std::map<std::string, std::string> split_of;
  for (const auto& r : m.records) split_of[r.id] = r.split;
  for (const auto& s : res.samples) splits.push_back(split_of.at(s.id));
  data::write_dataset(a.out, res.samples, splits, res.palette, res.homography);
  write_snapshot(a.out, "prepare-data", {{"manifest", a.manifest}});
  std::cout << "prepared " << res.samples.size() << " samples (" << res.skipped
            << " skipped) into " << a.out << "\n";
  return 0;
}

struct TrainArgs {
  std::string data;
  std::string out;
  std::string method = "x-pix2pix";
  std::string preset;
  std::string config_file;
  std::vector<std::string> overrides;
  uint64_t seed = 0;
  bool seed_set = false;
};

int cmd_train(const TrainArgs& a) {
  train::TrainConfig cfg;
  if (!a.config_file.empty()) cfg = train::TrainConfig::from_file(a.config_file);
  cfg.method = a.method;
  apply_preset(cfg, a.preset);
  if (a.seed_set) cfg.seed = a.seed;
  for (const auto& kv : a.overrides) {
    const size_t eq = kv.find('=');
    require(eq != std::string::npos, "config", "--set expects key=value: " + kv);
    cfg.set_kv(kv.substr(0, eq), kv.substr(eq + 1));
  }

  data::LoadResult res = load_dataset_dir(a.data, "train");
  require(!res.samples.empty(), "config", "no training samples in " + a.data);
  train::Trainer trainer(cfg, res.samples, res.homography);
  trainer.run();

  const fs::path out(a.out);
  fs::create_directories(out);
  trainer.save_checkpoint(out / "checkpoint.ckpt");
  {
    std::ofstream log(out / "log.csv");
    require(log.good(), "io", "cannot write log.csv");
    log << loss::LossReport::csv_header() << "\n";
    for (const auto& sl : trainer.logs()) log << sl.report.csv_row(sl.step) << "\n";
  }
  {
    std::ofstream rc(out / "run-config.txt");
    rc << "subcommand=train\ndata=" << a.data << "\n" << trainer.config().resolved_text();
  }
  double tail_l1 = 0.0;
  int tail = 0;
  const auto& logs = trainer.logs();
  for (size_t i = logs.size() >= 10 ? logs.size() - 10 : 0; i < logs.size(); ++i) {
    tail_l1 += logs[i].report.l1_img;
    ++tail;
  }
  std::cout << "trained " << cfg.method << " for " << trainer.step() << " steps; "
            << "mean l1_img over last " << tail << " steps: "
            << (tail > 0 ? tail_l1 / tail : 0.0) << "\n";
  return 0;
}

struct SynthesizeArgs {
  std::string ckpt;
  std::string input;
  std::string data;
  std::string split = "test";
  std::string out;
  int limit = 0;
  bool pre_warped = false;
};

int cmd_synthesize(const SynthesizeArgs& a) {
  auto trainer = train::Trainer::load_checkpoint(a.ckpt);
  const fs::path out(a.out);
  fs::create_directories(out / "images");

  auto emit = [&](const std::string& id, const Tensor& source, const Tensor* target) {
    train::Trainer::SynthesisResult r = trainer->synthesize(source, a.pre_warped);
    img::save_ppm(out / "images" / (id + ".ppm"), r.image);
    if (r.segmap) {
      fs::create_directories(out / "segs");
      img::save_ppm(out / "segs" / (id + ".ppm"), *r.segmap);
    }
    if (r.composite) {
      fs::create_directories(out / "composites");
      img::save_ppm(out / "composites" / (id + ".ppm"), *r.composite);
    }
    fs::create_directories(out / "inputs");
    img::save_ppm(out / "inputs" / (id + ".ppm"), source);
    if (target != nullptr) {
      fs::create_directories(out / "targets");
      img::save_ppm(out / "targets" / (id + ".ppm"), *target);
    }
  };

  if (!a.input.empty()) {
    emit("single", img::load_ppm(a.input), nullptr);
  } else {
    require(!a.data.empty(), "config", "synthesize needs --input or --data");
    data::LoadResult res = load_dataset_dir(a.data, a.split);
    require(!res.samples.empty(), "config", "no samples to synthesize");
    int count = 0;
    for (const auto& s : res.samples) {
      if (a.limit > 0 && count >= a.limit) break;
      const bool a2g = trainer->config().direction == "a2g";
      // Feed the raw source view; h-* checkpoints warp internally.
      const Tensor& source = a2g ? s.aerial : s.ground;
      const Tensor& target = a2g ? s.ground : s.aerial;
      emit(s.id, source, &target);
      ++count;
    }
  }
  write_snapshot(out, "synthesize",
                 {{"ckpt", a.ckpt},
                  {"input", a.input},
                  {"data", a.data},
                  {"split", a.split},
                  {"limit", std::to_string(a.limit)},
                  {"pre_warped", a.pre_warped ? "1" : "0"},
                  {"method", trainer->config().method}});
  return 0;
}

struct WarpArgs {
  std::string image;
  std::string homography;
  std::string points;
  std::string out;
};

int cmd_warp(const WarpArgs& a) {
  require(!a.homography.empty() || !a.points.empty(), "config",
          "warp needs --homography or --points");
  const Tensor src = img::load_ppm(a.image);
  geo::Homography h = a.homography.empty()
                          ? geo::estimate_homography(geo::Correspondences::load(a.points))
                          : geo::Homography::load(a.homography);
  geo::WarpResult wr = geo::warp_image(src, h, src.dim(1), src.dim(2));
  const fs::path out(a.out);
  fs::create_directories(out);
  img::save_ppm(out / "warped.ppm", wr.image);
  img::save_pgm(out / "validity.pgm", wr.validity_mask);
  h.save(out / "homography.txt");
  write_snapshot(out, "warp",
                 {{"image", a.image}, {"homography", a.homography}, {"points", a.points}});
  return 0;
}

struct CompositeArgs {
  std::string inpaint, car, warped, out;
  std::string r1, r2;
  int band = -1;
};

int cmd_composite(const CompositeArgs& a) {
  const Tensor inpaint = img::load_ppm(a.inpaint);
  const Tensor car = img::load_ppm(a.car);
  const Tensor warped = img::load_ppm(a.warped);
  require(inpaint.dim(1) == inpaint.dim(2), "shape", "composite wants square frames");
  const int frame = inpaint.dim(1);
  train::RegionConfig rc = train::RegionConfig::defaults_for(frame);
  if (!a.r1.empty()) rc.r1 = parse_rect(a.r1);
  if (!a.r2.empty()) rc.r2 = parse_rect(a.r2);
  if (a.band >= 0) rc.band_width = a.band;
  const geo::RegionMaskSet masks =
      geo::make_region_masks(frame, rc.r1, rc.r2, rc.band_width);
  const Tensor comp = geo::composite_regions(inpaint, car, warped, masks);
  const fs::path out(a.out);
  fs::create_directories(out);
  img::save_ppm(out / "composite.ppm", comp);
  masks.save(out);
  write_snapshot(out, "composite",
                 {{"inpaint", a.inpaint},
                  {"car", a.car},
                  {"warped", a.warped},
                  {"band", std::to_string(rc.band_width)}});
  return 0;
}

struct EvaluateArgs {
  std::string fake, real, out;
  std::string classifier;
  std::string fit_data;
  std::string fake_probs, real_probs, fake_acts, real_acts;
  int kl_batches = 10;
  int fit_steps = 400;
};

int cmd_evaluate(const EvaluateArgs& a) {
  require(!a.out.empty(), "config", "evaluate needs --out");
  const std::vector<fs::path> fake_files = list_ppm(a.fake);
  const std::vector<fs::path> real_files = list_ppm(a.real);
  require(fake_files.size() == real_files.size(), "config",
          "fake/real image counts differ (" + std::to_string(fake_files.size()) +
              " vs " + std::to_string(real_files.size()) + ")");
  const std::vector<Tensor> fake_imgs = load_images(fake_files);
  const std::vector<Tensor> real_imgs = load_images(real_files);

  metrics::EvalOptions opt;
  opt.kl_batches = a.kl_batches;
  metrics::MetricReport report;

  const bool matrices_given = !a.fake_probs.empty();
  if (matrices_given) {
    require(!a.real_probs.empty() && !a.fake_acts.empty() && !a.real_acts.empty(),
            "config", "matrix import needs all four --*-probs/--*-acts files");
    report = metrics::evaluate_with_matrices(
        fake_imgs, real_imgs, metrics::load_matrix(a.fake_probs),
        metrics::load_matrix(a.real_probs), metrics::load_matrix(a.fake_acts),
        metrics::load_matrix(a.real_acts), opt);
  } else {
    require(!a.classifier.empty(), "config",
            "evaluate needs --classifier or precomputed matrices");
    metrics::SceneClassifier::Spec spec;
    metrics::SceneClassifier clf(spec, 1);
    if (fs::exists(a.classifier)) {
      clf.load_weights(a.classifier);
    } else {
      require(!a.fit_data.empty(), "config",
              "classifier checkpoint missing; pass --fit-data to train one");
      data::LoadResult res = load_dataset_dir(a.fit_data, "train");
      std::map<std::string, int> labels;
      {
        std::ifstream lf(fs::path(a.fit_data) / "labels.txt");
        require(lf.good(), "io", "no labels.txt under " + a.fit_data);
        std::string id, name;
        int cls;
        while (lf >> id >> cls >> name) labels[id] = cls;
      }
      std::vector<Tensor> imgs;
      std::vector<int> lab;
      for (const auto& s : res.samples) {
        auto it = labels.find(s.id);
        require(it != labels.end(), "config", "no label for sample " + s.id);
        imgs.push_back(s.ground);
        lab.push_back(it->second);
      }
      const auto stats = clf.fit(imgs, lab, a.fit_steps, 16, 1e-3, 11);
      std::cout << "fitted scene classifier: train accuracy " << stats.train_accuracy
                << "%\n";
      clf.save_weights(a.classifier);
    }
    report = metrics::evaluate(fake_imgs, real_imgs, clf, opt);
  }

  const fs::path out(a.out);
  fs::create_directories(out);
  report.save_csv(out / "metrics.csv");
  {
    std::ofstream txt(out / "metrics.txt");
    const auto& labels = metrics::MetricReport::table_labels();
    const auto vals = report.values();
    for (size_t i = 0; i < labels.size(); ++i) {
      txt << labels[i];
      for (size_t pad = labels[i].size(); pad < 26; ++pad) txt << ' ';
      txt << vals[i] << "\n";
    }
  }
  write_snapshot(out, "evaluate",
                 {{"fake", a.fake},
                  {"real", a.real},
                  {"classifier", a.classifier},
                  {"kl_batches", std::to_string(a.kl_batches)}});
  std::cout << report.to_csv();
  return 0;
}

struct ReportArgs {
  std::vector<std::string> runs;
  std::string out;
  int grid_n = 4;
};

std::string run_method_name(const fs::path& run) {
  const fs::path rc = run / "run-config.txt";
  if (fs::exists(rc)) {
    std::ifstream in(rc);
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("method=", 0) == 0) return line.substr(7);
    }
  }
  return run.filename().string();
}

int cmd_report(const ReportArgs& a) {
  require(!a.runs.empty(), "config", "report needs at least one --runs directory");
  const fs::path out(a.out);
  fs::create_directories(out);

  // Metric table, sorted by method name; missing metrics render as "--".
  struct Row {
    std::string method;
    std::optional<metrics::MetricReport> report;
    fs::path dir;
  };
  std::vector<Row> rows;
  for (const auto& r : a.runs) {
    Row row;
    row.dir = r;
    row.method = run_method_name(r);
    const fs::path mcsv = fs::path(r) / "metrics.csv";
    if (fs::exists(mcsv)) row.report = metrics::MetricReport::load_csv(mcsv);
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(),
            [](const Row& x, const Row& y) { return x.method < y.method; });

  {
    std::ofstream table(out / "table.txt");
    std::ofstream csv(out / "report.csv");
    const auto& labels = metrics::MetricReport::table_labels();
    const auto& cols = metrics::MetricReport::column_names();
    table << "method";
    csv << "method";
    for (size_t i = 0; i < labels.size(); ++i) {
      table << " | " << labels[i];
      csv << "," << cols[i];
    }
    table << "\n";
    csv << "\n";
    for (const auto& row : rows) {
      table << row.method;
      csv << row.method;
      for (size_t i = 0; i < labels.size(); ++i) {
        std::string cell = "--";
        if (row.report) {
          const double v = row.report->values()[i];
          if (!std::isnan(v)) {
            std::ostringstream os;
            os.precision(4);
            os << std::fixed << v;
            cell = os.str();
          }
        }
        table << " | " << cell;
        csv << "," << cell;
      }
      table << "\n";
      csv << "\n";
    }
  }

  // Image grid: input | ground truth | one column per method.
  std::vector<std::string> ids;
  {
    const fs::path inputs = rows[0].dir / "inputs";
    if (fs::is_directory(inputs)) {
      for (const auto& e : fs::directory_iterator(inputs)) {
        if (e.path().extension() == ".ppm") ids.push_back(e.path().stem().string());
      }
      std::sort(ids.begin(), ids.end());
      if (a.grid_n > 0 && static_cast<int>(ids.size()) > a.grid_n) {
        ids.resize(static_cast<size_t>(a.grid_n));
      }
    }
  }
  if (!ids.empty()) {
    const Tensor probe = img::load_ppm(rows[0].dir / "inputs" / (ids[0] + ".ppm"));
    const int S = probe.dim(1);
    const int pad = 2;
    // The ground-truth column appears only when the runs carry targets
    // (single-image synthesis has none).
    const bool has_targets = fs::is_directory(rows[0].dir / "targets");
    const int lead = has_targets ? 2 : 1;
    const int cols = lead + static_cast<int>(rows.size());
    const int W = cols * S + (cols - 1) * pad;
    const int H = static_cast<int>(ids.size()) * S +
                  (static_cast<int>(ids.size()) - 1) * pad;
    Tensor grid({3, H, W}, 1.0f);
    auto blit = [&](const Tensor& tile, int row, int col) {
      const int y0 = row * (S + pad), x0 = col * (S + pad);
      for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < S; ++y) {
          for (int x = 0; x < S; ++x) grid.at(c, y0 + y, x0 + x) = tile.at(c, y, x);
        }
      }
    };
    for (size_t r = 0; r < ids.size(); ++r) {
      blit(img::load_ppm(rows[0].dir / "inputs" / (ids[r] + ".ppm")), static_cast<int>(r), 0);
      const fs::path target = rows[0].dir / "targets" / (ids[r] + ".ppm");
      if (has_targets && fs::exists(target)) {
        blit(img::load_ppm(target), static_cast<int>(r), 1);
      }
      for (size_t m = 0; m < rows.size(); ++m) {
        const fs::path img_path = rows[m].dir / "images" / (ids[r] + ".ppm");
        if (fs::exists(img_path)) {
          blit(img::load_ppm(img_path), static_cast<int>(r), lead + static_cast<int>(m));
        }
      }
    }
    img::save_ppm(out / "grid.ppm", grid);
  }

  std::map<std::string, std::string> kv;
  kv["grid_n"] = std::to_string(a.grid_n);
  for (size_t i = 0; i < a.runs.size(); ++i) kv["run" + std::to_string(i)] = a.runs[i];
  write_snapshot(out, "report", kv);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"crossview: cross-view image synthesis and evaluation toolkit"};
  app.require_subcommand(1);

  SynthDataArgs sd;
  auto* c_sd = app.add_subcommand("synth-data", "generate a synthetic paired dataset");
  c_sd->add_option("--n", sd.n, "training samples");
  c_sd->add_option("--n-test", sd.n_test, "test samples");
  c_sd->add_option("--seed", sd.seed, "base seed");
  c_sd->add_option("--size", sd.size, "frame size (64 or 256)");
  c_sd->add_option("--out", sd.out, "output directory")->required();

  PrepareArgs pa;
  auto* c_pd = app.add_subcommand("prepare-data", "ingest a manifest and materialize a dataset");
  c_pd->add_option("--manifest", pa.manifest, "manifest file")->required();
  c_pd->add_option("--out", pa.out, "output directory")->required();

  TrainArgs ta;
  auto* c_tr = app.add_subcommand("train", "train one method");
  c_tr->add_option("--data", ta.data, "dataset directory")->required();
  c_tr->add_option("--out", ta.out, "run directory")->required();
  c_tr->add_option("--method", ta.method, "x-pix2pix|x-so|x-fork|x-seq|h-pix2pix|h-so|h-fork|h-seq|h-regions");
  c_tr->add_option("--preset", ta.preset, "overfit8|desk64|desk256");
  c_tr->add_option("--config", ta.config_file, "key=value config file");
  c_tr->add_option("--set", ta.overrides, "override config keys (key=value)");
  auto* seed_opt = c_tr->add_option("--seed", ta.seed, "training seed");

  SynthesizeArgs sa;
  auto* c_sy = app.add_subcommand("synthesize", "run inference from a checkpoint");
  c_sy->add_option("--ckpt", sa.ckpt, "checkpoint file")->required();
  c_sy->add_option("--input", sa.input, "single input image");
  c_sy->add_option("--data", sa.data, "dataset directory");
  c_sy->add_option("--split", sa.split, "dataset split (default test)");
  c_sy->add_option("--limit", sa.limit, "max samples (0 = all)");
  c_sy->add_flag("--pre-warped", sa.pre_warped, "input is already homography-warped");
  c_sy->add_option("--out", sa.out, "output directory")->required();

  WarpArgs wa;
  auto* c_wp = app.add_subcommand("warp", "apply or estimate a homography");
  c_wp->add_option("--image", wa.image, "input image")->required();
  c_wp->add_option("--homography", wa.homography, "homography file (9 numbers)");
  c_wp->add_option("--points", wa.points, "correspondence file (4 x `sx sy tx ty`)");
  c_wp->add_option("--out", wa.out, "output directory")->required();

  CompositeArgs ca;
  auto* c_cp = app.add_subcommand("composite", "region compositing");
  c_cp->add_option("--inpaint", ca.inpaint, "inpainting network output")->required();
  c_cp->add_option("--car", ca.car, "car network output")->required();
  c_cp->add_option("--warped", ca.warped, "homography-transformed input")->required();
  c_cp->add_option("--r1", ca.r1, "inpaint rect x0,y0,x1,y1");
  c_cp->add_option("--r2", ca.r2, "car rect x0,y0,x1,y1");
  c_cp->add_option("--band", ca.band, "band width (px)");
  c_cp->add_option("--out", ca.out, "output directory")->required();

  EvaluateArgs ea;
  auto* c_ev = app.add_subcommand("evaluate", "run the quantitative battery");
  c_ev->add_option("--fake", ea.fake, "directory of generated images")->required();
  c_ev->add_option("--real", ea.real, "directory of real images")->required();
  c_ev->add_option("--out", ea.out, "output directory")->required();
  c_ev->add_option("--classifier", ea.classifier, "scene classifier checkpoint");
  c_ev->add_option("--fit-data", ea.fit_data, "dataset dir to fit a missing classifier");
  c_ev->add_option("--fit-steps", ea.fit_steps, "classifier fitting steps");
  c_ev->add_option("--fake-probs", ea.fake_probs, "precomputed fake ProbMatrix");
  c_ev->add_option("--real-probs", ea.real_probs, "precomputed real ProbMatrix");
  c_ev->add_option("--fake-acts", ea.fake_acts, "precomputed fake ActivationMatrix");
  c_ev->add_option("--real-acts", ea.real_acts, "precomputed real ActivationMatrix");
  c_ev->add_option("--kl-batches", ea.kl_batches, "KL batch count");

  ReportArgs ra;
  auto* c_rp = app.add_subcommand("report", "comparison table + image grid");
  c_rp->add_option("--runs", ra.runs, "evaluated run directories")->required();
  c_rp->add_option("--grid-n", ra.grid_n, "rows in the image grid");
  c_rp->add_option("--out", ra.out, "output directory")->required();

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      std::cout << app.help();
      return 0;
    }
    std::cerr << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (c_sd->parsed()) return cmd_synth_data(sd);
    if (c_pd->parsed()) return cmd_prepare_data(pa);
    if (c_tr->parsed()) {
      ta.seed_set = seed_opt->count() > 0;
      return cmd_train(ta);
    }
    if (c_sy->parsed()) return cmd_synthesize(sa);
    if (c_wp->parsed()) return cmd_warp(wa);
    if (c_cp->parsed()) return cmd_composite(ca);
    if (c_ev->parsed()) return cmd_evaluate(ea);
    if (c_rp->parsed()) return cmd_report(ra);
  } catch (const Error& e) {
    std::cerr << "error: category=" << e.category() << " " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: category=internal " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace xv::cli
