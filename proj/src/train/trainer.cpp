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

#include "xv/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "xv/core/image.hpp"

namespace xv::train {

namespace {

constexpr uint64_t kShuffleTag = 0x73687566ULL;
constexpr uint64_t kAugmentTag = 0x6175676dULL;
constexpr uint64_t kDropTag = 0x64726f70ULL;

Tensor to_batch(const std::vector<const Tensor*>& imgs) {
  const Tensor& first = *imgs[0];
  Tensor out({static_cast<int>(imgs.size()), first.dim(0), first.dim(1), first.dim(2)});
  const int64_t sz = first.size();
  for (size_t i = 0; i < imgs.size(); ++i) {
    require(imgs[i]->same_shape(first), "shape", "batch images must share shape");
    std::copy(imgs[i]->data(), imgs[i]->data() + sz, out.data() + static_cast<int64_t>(i) * sz);
  }
  return out;
}

Tensor single_batch(const Tensor& img) { return to_batch({&img}); }

Tensor from_batch(const Tensor& batch, int i) {
  Tensor out({batch.dim(1), batch.dim(2), batch.dim(3)});
  const int64_t sz = out.size();
  std::copy(batch.data() + static_cast<int64_t>(i) * sz,
            batch.data() + static_cast<int64_t>(i + 1) * sz, out.data());
  return out;
}

Tensor mask_image(const Tensor& img, const Tensor& mask_hw) {
  Tensor out = img;
  const int64_t plane = mask_hw.size();
  for (int c = 0; c < img.dim(0); ++c) {
    float* dst = out.data() + static_cast<int64_t>(c) * plane;
    for (int64_t i = 0; i < plane; ++i) dst[i] *= mask_hw[i];
  }
  return out;
}

void write_tensor(std::ostream& out, const std::string& name, const Tensor& t) {
  out << name << " " << t.rank();
  for (int i = 0; i < t.rank(); ++i) out << " " << t.dim(i);
  out << "\n";
  out.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(float)));
  out << "\n";
}

void read_tensor_into(std::istream& in, const std::string& expect_name, Tensor& t) {
  std::string name;
  int rank = 0;
  in >> name >> rank;
  require(name == expect_name, "state",
          "checkpoint tensor order mismatch: got " + name + ", expected " + expect_name);
  std::vector<int> dims(static_cast<size_t>(rank));
  for (auto& d : dims) in >> d;
  in.ignore(1);
  require(t.shape() == dims, "state", "checkpoint tensor shape mismatch: " + name);
  in.read(reinterpret_cast<char*>(t.data()),
          static_cast<std::streamsize>(t.size() * sizeof(float)));
  require(in.gcount() == static_cast<std::streamsize>(t.size() * sizeof(float)), "io",
          "truncated checkpoint");
}

}  // namespace

RegionConfig RegionConfig::defaults_for(int frame) {
  RegionConfig rc;
  auto sc = [frame](int v) { return v * frame / 256; };
  rc.r1 = {0, 0, frame, sc(128)};
  rc.r2 = {sc(64), sc(184), sc(192), frame};
  rc.band_width = std::max(1, sc(8));
  return rc;
}

// ----------------------------------------------------------------- config ---

void TrainConfig::validate(bool have_homography) const {
  const auto& names = method_names();
  require(std::find(names.begin(), names.end(), method) != names.end(), "config",
          "unknown method: " + method);
  require(direction == "a2g" || direction == "g2a", "config",
          "direction must be a2g or g2a");
  if (is_h_method()) {
    require(direction == "a2g", "config",
            "homography-guided methods are defined for a2g only");
    require(have_homography, "config",
            "method " + method + " needs a dataset homography or warped inputs");
  }
  require(batch_size >= 1, "config", "batch_size must be >= 1");
  require(epochs >= 0 && steps >= 0, "config", "epochs/steps must be >= 0");
  require(smooth > 0.0 && smooth <= 1.0, "config", "smooth must lie in (0,1]");
  require(d_steps_per_g >= 1, "config", "d_steps_per_g must be >= 1");
  require(lr > 0.0, "config", "learning rate must be positive");
  weights.validate();
  realism_weights.validate();
  require(resolution == 64 || resolution == 256, "config",
          "training resolution must be 64 or 256");
}

int TrainConfig::total_steps(size_t dataset_size) const {
  if (method == "h-regions") return sub1_steps + sub2_steps + sub3_steps;
  if (steps > 0) return steps;
  // With neither steps nor epochs set, fall back to the full-scale epoch
  // budgets (100 low-res, 35 high-res); desk presets override with steps.
  const int e = epochs > 0 ? epochs : (resolution == 64 ? 100 : 35);
  const int per_epoch =
      static_cast<int>((dataset_size + static_cast<size_t>(batch_size) - 1) /
                       static_cast<size_t>(batch_size));
  return e * per_epoch;
}

std::string TrainConfig::resolved_text() const {
  std::ostringstream os;
  os << "method=" << method << "\ndirection=" << direction << "\nepochs=" << epochs
     << "\nsteps=" << steps << "\nbatch_size=" << batch_size << "\nlr=" << lr
     << "\nadam_beta1=" << adam_beta1 << "\nadam_beta2=" << adam_beta2
     << "\nsmooth=" << smooth << "\nlambda1=" << weights.lambda1
     << "\nlambda2=" << weights.lambda2
     << "\nrealism_lambda1=" << realism_weights.lambda1
     << "\nrealism_lambda2=" << realism_weights.lambda2 << "\nseed=" << seed
     << "\nresolution=" << resolution << "\nbase_width=" << base_width
     << "\nblock_trim=" << block_trim
     << "\nskip_connections=" << (skip_connections ? 1 : 0)
     << "\nd_steps_per_g=" << d_steps_per_g
     << "\nso_half_adv=" << (so_half_adv ? 1 : 0) << "\naugment=" << (augment ? 1 : 0)
     << "\njitter_px=" << jitter_px << "\nsub1_steps=" << sub1_steps
     << "\nsub2_steps=" << sub2_steps << "\nsub3_steps=" << sub3_steps
     << "\nband_width=" << band_width << "\n";
  return os.str();
}

void TrainConfig::set_kv(const std::string& key, const std::string& value) {
  auto as_int = [&] { return std::stoi(value); };
  auto as_u64 = [&] { return static_cast<uint64_t>(std::stoull(value)); };
  auto as_double = [&] { return std::stod(value); };
  auto as_bool = [&] { return value == "1" || value == "true"; };
  if (key == "method") method = value;
  else if (key == "direction") direction = value;
  else if (key == "epochs") epochs = as_int();
  else if (key == "steps") steps = as_int();
  else if (key == "batch_size") batch_size = as_int();
  else if (key == "lr") lr = as_double();
  else if (key == "adam_beta1") adam_beta1 = as_double();
  else if (key == "adam_beta2") adam_beta2 = as_double();
  else if (key == "smooth") smooth = as_double();
  else if (key == "lambda1") weights.lambda1 = as_double();
  else if (key == "lambda2") weights.lambda2 = as_double();
  else if (key == "realism_lambda1") realism_weights.lambda1 = as_double();
  else if (key == "realism_lambda2") realism_weights.lambda2 = as_double();
  else if (key == "seed") seed = as_u64();
  else if (key == "resolution") resolution = as_int();
  else if (key == "base_width") base_width = as_int();
  else if (key == "block_trim") block_trim = as_int();
  else if (key == "skip_connections") skip_connections = as_bool();
  else if (key == "d_steps_per_g") d_steps_per_g = as_int();
  else if (key == "so_half_adv") so_half_adv = as_bool();
  else if (key == "augment") augment = as_bool();
  else if (key == "jitter_px") jitter_px = as_int();
  else if (key == "sub1_steps") sub1_steps = as_int();
  else if (key == "sub2_steps") sub2_steps = as_int();
  else if (key == "sub3_steps") sub3_steps = as_int();
  else if (key == "band_width") band_width = as_int();
  else fail("config", "unknown config key: " + key);
}

TrainConfig TrainConfig::from_text(const std::string& text) {
  TrainConfig cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    require(eq != std::string::npos, "config", "config lines must be key=value: " + line);
    cfg.set_kv(line.substr(0, eq), line.substr(eq + 1));
  }
  return cfg;
}

TrainConfig TrainConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "io", "cannot open config: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

CondTarget resolve_cond_target(const data::PairedSample& s, const TrainConfig& cfg) {
  CondTarget ct;
  if (cfg.direction == "a2g") {
    if (cfg.is_h_method()) {
      require(s.warped_aerial.has_value(), "config",
              "sample " + s.id + " lacks a warped aerial image");
      ct.cond = *s.warped_aerial;
    } else {
      ct.cond = s.aerial;
    }
    ct.target_img = s.ground;
  } else {
    ct.cond = s.ground;
    ct.target_img = s.aerial;
  }
  // The dataset carries one segmentation map (ground view); seg-regularized
  // methods use it as the auxiliary target in either direction.
  ct.target_seg = s.ground_seg;
  return ct;
}

// ---------------------------------------------------------------- trainer ---

Trainer::Trainer(TrainConfig cfg, std::vector<data::PairedSample> dataset,
                 std::optional<geo::Homography> homography)
    : cfg_(std::move(cfg)), data_(std::move(dataset)), homography_(std::move(homography)) {
  if (cfg_.is_h_method() && homography_) {
    for (auto& s : data_) {
      if (!s.warped_aerial) {
        s.warped_aerial =
            geo::warp_image(s.aerial, *homography_, s.aerial.dim(1), s.aerial.dim(2)).image;
      }
    }
  }
  const bool warped_ready =
      !data_.empty() && std::all_of(data_.begin(), data_.end(), [](const auto& s) {
        return s.warped_aerial.has_value();
      });
  cfg_.validate(homography_.has_value() || warped_ready);
  regions_ = RegionConfig::defaults_for(cfg_.resolution);
  if (cfg_.band_width >= 0) regions_.band_width = cfg_.band_width;
  masks_ = geo::make_region_masks(cfg_.resolution, regions_.r1, regions_.r2,
                                  regions_.band_width);

  std::sort(data_.begin(), data_.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  for (const auto& s : data_) {
    require(s.aerial.dim(1) == cfg_.resolution && s.aerial.dim(2) == cfg_.resolution,
            "shape", "sample " + s.id + " does not match the training resolution");
    require(img::value_range_ok(s.aerial) && img::value_range_ok(s.ground) &&
                img::value_range_ok(s.ground_seg),
            "numeric", "sample " + s.id + " leaves the [-1,1] value range");
    CondTarget ct = resolve_cond_target(s, cfg_);
    conds_.push_back(std::move(ct.cond));
    targets_img_.push_back(std::move(ct.target_img));
    targets_seg_.push_back(std::move(ct.target_seg));
  }
  make_nets();
}

void Trainer::make_nets() {
  const bool so = cfg_.method == "x-so" || cfg_.method == "h-so";
  const bool fork = cfg_.method == "x-fork" || cfg_.method == "h-fork";
  const bool seq = cfg_.method == "x-seq" || cfg_.method == "h-seq";
  const bool regions = cfg_.method == "h-regions";

  nets::GeneratorSpec g;
  g.resolution = cfg_.resolution;
  g.base_width = cfg_.base_width;
  g.block_trim = cfg_.block_trim;
  g.skip_connections = cfg_.skip_connections;
  nets::DiscriminatorSpec d;
  d.resolution = cfg_.resolution;
  d.base_width = cfg_.base_width;
  d.in_channels = 6;

  auto add = [&](const std::string& role, std::unique_ptr<nets::Network> net) {
    opts_[role] = std::make_unique<nets::Adam>(net->param_vars(), cfg_.lr,
                                               cfg_.adam_beta1, cfg_.adam_beta2);
    nets_[role] = std::move(net);
  };
  auto gseed = [&](const char* role) { return derive_seed(cfg_.seed, nets::fnv1a64(role)); };

  if (seq) {
    add("g1", nets::build_generator(g, gseed("g1")));
    add("d1", nets::build_discriminator(d, gseed("d1")));
    add("g2", nets::build_generator(g, gseed("g2")));
    add("d2", nets::build_discriminator(d, gseed("d2")));
  } else if (regions) {
    add("inpaint_g", nets::build_generator(g, gseed("inpaint_g")));
    add("inpaint_d", nets::build_discriminator(d, gseed("inpaint_d")));
    add("car_g", nets::build_generator(g, gseed("car_g")));
    add("car_d", nets::build_discriminator(d, gseed("car_d")));
    // The realism pass is copy-dominant: everything outside the bands must
    // reproduce its own input. Skip connections give it that identity path;
    // the synthesis subtasks stay plain encoder-decoders.
    nets::GeneratorSpec gr = g;
    gr.skip_connections = true;
    add("realism_g", nets::build_generator(gr, gseed("realism_g")));
    add("realism_d", nets::build_discriminator(d, gseed("realism_d")));
  } else if (fork) {
    nets::GeneratorSpec gf = g;
    gf.out_heads = 2;
    add("g", nets::build_fork_generator(gf, gseed("g")));
    add("d", nets::build_discriminator(d, gseed("d")));
  } else if (so) {
    nets::GeneratorSpec gs = g;
    gs.out_channels_per_head = 6;
    d.in_channels = 9;  // 3 conditioning + 6 stacked candidate channels
    add("g", nets::build_generator(gs, gseed("g")));
    add("d", nets::build_discriminator(d, gseed("d")));
  } else {
    add("g", nets::build_generator(g, gseed("g")));
    add("d", nets::build_discriminator(d, gseed("d")));
  }
}

nets::Network& Trainer::net(const std::string& role) {
  auto it = nets_.find(role);
  require(it != nets_.end(), "state", "no network for role " + role);
  return *it->second;
}

std::vector<std::string> Trainer::roles() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : nets_) out.push_back(k);
  return out;
}

uint64_t Trainer::param_hash(const std::string& role) {
  uint64_t h = 1469598103934665603ULL;
  for (const auto& p : net(role).params()) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(p.var->value.data());
    const size_t n = static_cast<size_t>(p.var->value.size()) * sizeof(float);
    for (size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  }
  return h;
}

std::vector<int> Trainer::batch_indices() {
  const int n = static_cast<int>(data_.size());
  std::vector<int> out;
  int64_t cached_epoch = -1;
  std::vector<int> perm;
  for (int b = 0; b < cfg_.batch_size; ++b) {
    const int64_t g = step_ * cfg_.batch_size + b;
    const int64_t epoch = g / n;
    const int pos = static_cast<int>(g % n);
    if (epoch != cached_epoch) {
      // Per-epoch shuffle keyed by (seed, epoch): stateless, so resuming
      // from a checkpoint replays the identical order.
      perm.resize(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
      Rng rng(derive_seed(cfg_.seed, kShuffleTag, static_cast<uint64_t>(epoch)));
      for (int i = n - 1; i > 0; --i) {
        std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(rng.uniform_int(0, i))]);
      }
      cached_epoch = epoch;
    }
    out.push_back(perm[static_cast<size_t>(pos)]);
  }
  return out;
}

Tensor Trainer::batch_of(const std::vector<Tensor>& pool, const std::vector<int>& idx) {
  std::vector<const Tensor*> ptrs;
  for (int i : idx) ptrs.push_back(&pool[static_cast<size_t>(i)]);
  return to_batch(ptrs);
}

void Trainer::append_log(const loss::LossReport& report) {
  logs_.push_back({step_, report});
}

void Trainer::guard_finite(const loss::LossReport& report) const {
  if (!std::isfinite(report.total) || !std::isfinite(report.adv_d)) {
    std::ostringstream os;
    os << "training diverged at step " << step_ << " (adv_d=" << report.adv_d
       << ", adv_g=" << report.adv_g << ", l1_img=" << report.l1_img
       << ", total=" << report.total << ")";
    fail("numeric", os.str());
  }
}

Trainer::BasicBatch Trainer::prepare_batch() {
  const std::vector<int> idx = batch_indices();
  BasicBatch bb;
  if (cfg_.augment) {
    std::vector<Tensor> conds, timgs, tsegs;
    for (size_t k = 0; k < idx.size(); ++k) {
      const uint64_t aseed = derive_seed(cfg_.seed, kAugmentTag,
                                         static_cast<uint64_t>(step_ * cfg_.batch_size + k));
      data::PairedSample aug =
          data::augment(data_[static_cast<size_t>(idx[k])], aseed, cfg_.jitter_px);
      CondTarget ct = resolve_cond_target(aug, cfg_);
      conds.push_back(std::move(ct.cond));
      timgs.push_back(std::move(ct.target_img));
      tsegs.push_back(std::move(ct.target_seg));
    }
    std::vector<const Tensor*> pc, pi, ps;
    for (size_t k = 0; k < conds.size(); ++k) {
      pc.push_back(&conds[k]);
      pi.push_back(&timgs[k]);
      ps.push_back(&tsegs[k]);
    }
    bb.cond = ad::constant(to_batch(pc));
    bb.timg = ad::constant(to_batch(pi));
    bb.tseg = ad::constant(to_batch(ps));
  } else {
    bb.cond = ad::constant(batch_of(conds_, idx));
    bb.timg = ad::constant(batch_of(targets_img_, idx));
    bb.tseg = ad::constant(batch_of(targets_seg_, idx));
  }
  return bb;
}

double Trainer::update_d(const std::string& d_role, const std::vector<std::string>& all_roles,
                         const ad::Var& cond, const ad::Var& target_cand,
                         const ad::Var& candidate) {
  ad::Var d_real = net(d_role).forward(ad::concat_channels(cond, target_cand), true, 0)[0];
  ad::Var d_fake =
      net(d_role).forward(ad::concat_channels(cond, ad::detach(candidate)), true, 0)[0];
  ad::Var d_loss = loss::adv_loss_d(d_real, d_fake, cfg_.smooth);
  for (const auto& r : all_roles) opts_.at(r)->zero_grad();
  ad::backward(d_loss);
  opts_.at(d_role)->step();
  return d_loss->value[0];
}

void Trainer::train_basic_step() {
  const bool so = cfg_.method == "x-so" || cfg_.method == "h-so";
  const bool fork = cfg_.method == "x-fork" || cfg_.method == "h-fork";
  BasicBatch bb = prepare_batch();

  const uint64_t dseed = derive_seed(cfg_.seed, kDropTag, static_cast<uint64_t>(step_));
  std::vector<ad::Var> heads = net("g").forward(bb.cond, true, dseed);

  // Candidate the discriminator judges: the image head for pix2pix/fork, all
  // six stacked channels for the SO variants.
  ad::Var candidate = heads[0];
  ad::Var target_cand = so ? ad::concat_channels(bb.timg, bb.tseg) : bb.timg;

  double d_loss_val = 0.0;
  for (int ds = 0; ds < cfg_.d_steps_per_g; ++ds) {
    d_loss_val = update_d("d", {"d", "g"}, bb.cond, target_cand, candidate);
  }

  ad::Var d_on_fake = net("d").forward(ad::concat_channels(bb.cond, candidate), true, 0)[0];
  loss::LossWeights w = cfg_.weights;
  if (so && cfg_.so_half_adv) w.lambda1 *= 0.5;
  loss::Objective obj;
  if (fork) {
    obj = loss::fork_objective(d_on_fake, heads[0], bb.timg, heads[1], bb.tseg, w);
  } else {
    obj = loss::pix2pix_objective(d_on_fake, candidate, target_cand, w);
  }
  opts_.at("g")->zero_grad();
  opts_.at("d")->zero_grad();
  ad::backward(obj.total);
  opts_.at("g")->step();

  obj.report.adv_d = d_loss_val;
  guard_finite(obj.report);
  append_log(obj.report);
  ++step_;
}

void Trainer::train_seq_step() {
  BasicBatch bb = prepare_batch();
  const uint64_t dseed = derive_seed(cfg_.seed, kDropTag, static_cast<uint64_t>(step_));
  ad::Var img1 = net("g1").forward(bb.cond, true, dseed)[0];
  // The generated image conditions the second stage, end to end.
  ad::Var seg2 = net("g2").forward(img1, true, dseed + 1)[0];

  const std::vector<std::string> all = {"d1", "d2", "g1", "g2"};
  double d_loss_val = 0.0;
  for (int ds = 0; ds < cfg_.d_steps_per_g; ++ds) {
    ad::Var img1_det = ad::detach(img1);
    d_loss_val = update_d("d1", all, bb.cond, bb.timg, img1);
    d_loss_val += update_d("d2", all, img1_det, bb.tseg, seg2);
  }

  ad::Var d1_on_fake = net("d1").forward(ad::concat_channels(bb.cond, img1), true, 0)[0];
  loss::Objective stage1 = loss::pix2pix_objective(d1_on_fake, img1, bb.timg, cfg_.weights);
  ad::Var d2_on_fake = net("d2").forward(ad::concat_channels(img1, seg2), true, 0)[0];
  loss::Objective stage2 = loss::pix2pix_objective(d2_on_fake, seg2, bb.tseg, cfg_.weights);
  loss::Objective obj = loss::seq_objective(stage1, stage2);
  for (const auto& r : all) opts_.at(r)->zero_grad();
  ad::backward(obj.total);
  opts_.at("g1")->step();
  opts_.at("g2")->step();

  obj.report.adv_d = d_loss_val;
  guard_finite(obj.report);
  append_log(obj.report);
  ++step_;
}

void Trainer::h_subtask_step(const std::string& g_role, const std::string& d_role,
                             const Tensor* cond_mask, const Tensor* loss_mask,
                             bool realism, const std::vector<Tensor>* cond_override) {
  const std::vector<int> idx = batch_indices();
  const std::vector<Tensor>& cond_pool = cond_override ? *cond_override : conds_;
  ad::Var cond = ad::constant(batch_of(cond_pool, idx));
  ad::Var target = ad::constant(batch_of(targets_img_, idx));
  if (cond_mask != nullptr) {
    cond = ad::mul_mask_hw(cond, *cond_mask);
    target = ad::mul_mask_hw(target, *cond_mask);
  }

  const uint64_t dseed = derive_seed(cfg_.seed, kDropTag, static_cast<uint64_t>(step_));
  ad::Var out = net(g_role).forward(cond, true, dseed)[0];

  double d_loss_val = 0.0;
  for (int ds = 0; ds < cfg_.d_steps_per_g; ++ds) {
    d_loss_val = update_d(d_role, {d_role, g_role}, cond, target, out);
  }

  ad::Var d_on_fake = net(d_role).forward(ad::concat_channels(cond, out), true, 0)[0];
  loss::Objective obj;
  if (realism) {
    obj = loss::realism_objective(out, cond, d_on_fake, *loss_mask, cfg_.realism_weights);
  } else {
    ad::Var adv = loss::adv_loss_g(d_on_fake);
    ad::Var l1 = loss::l1_loss(out, target, loss_mask);
    obj.total = ad::weighted_sum({adv, l1}, {cfg_.weights.lambda1, cfg_.weights.lambda2});
    obj.report.adv_g = adv->value[0];
    obj.report.l1_img = l1->value[0];
    obj.report.total = cfg_.weights.lambda1 * obj.report.adv_g +
                       cfg_.weights.lambda2 * obj.report.l1_img;
  }
  opts_.at(g_role)->zero_grad();
  opts_.at(d_role)->zero_grad();
  ad::backward(obj.total);
  opts_.at(g_role)->step();

  obj.report.adv_d = d_loss_val;
  guard_finite(obj.report);
  append_log(obj.report);
  ++step_;
}

Tensor Trainer::infer_one(const std::string& role, const Tensor& input, int head) {
  ad::Var out = net(role).forward(ad::constant(single_batch(input)), false, 0)[static_cast<size_t>(head)];
  return from_batch(out->value, 0);
}

void Trainer::build_composites() {
  composites_.clear();
  for (size_t i = 0; i < data_.size(); ++i) {
    const Tensor& warped = conds_[i];
    const Tensor inpaint = infer_one("inpaint_g", warped, 0);
    const Tensor car = infer_one("car_g", mask_image(warped, masks_.m2), 0);
    composites_.push_back(geo::composite_regions(inpaint, car, warped, masks_));
  }
}

void Trainer::run_h_regions() {
  require(!data_.empty(), "config", "training needs a non-empty dataset");
  const int s1 = cfg_.sub1_steps, s2 = cfg_.sub2_steps, s3 = cfg_.sub3_steps;
  while (step_ < s1) {
    phase_ = 1;
    h_subtask_step("inpaint_g", "inpaint_d", nullptr, &masks_.m1, false, nullptr);
  }
  while (step_ < s1 + s2) {
    phase_ = 2;
    h_subtask_step("car_g", "car_d", &masks_.m2, &masks_.m2, false, nullptr);
  }
  if (step_ >= s1 + s2) {
    if (composites_.empty()) build_composites();
    while (step_ < s1 + s2 + s3) {
      phase_ = 3;
      h_subtask_step("realism_g", "realism_d", nullptr, &masks_.band, true, &composites_);
    }
    phase_ = 4;
  }
}

void Trainer::run_steps(int n) {
  require(!data_.empty(), "config", "training needs a non-empty dataset");
  require(cfg_.method != "h-regions", "config",
          "run_steps drives the alternating methods; h-regions uses run()");
  const bool seq = cfg_.method == "x-seq" || cfg_.method == "h-seq";
  for (int i = 0; i < n; ++i) {
    if (seq) train_seq_step();
    else train_basic_step();
  }
}

void Trainer::run() {
  require(!data_.empty(), "config", "training needs a non-empty dataset");
  if (cfg_.method == "h-regions") {
    run_h_regions();
    return;
  }
  const int total = cfg_.total_steps(data_.size());
  if (total > static_cast<int>(step_)) run_steps(total - static_cast<int>(step_));
}

// ------------------------------------------------------------- synthesis ---

Trainer::SynthesisResult Trainer::synthesize(const Tensor& source_view, bool pre_warped) {
  require(source_view.rank() == 3, "shape", "synthesize wants a (3,H,W) image");
  SynthesisResult res;
  Tensor cond = source_view;
  if (cfg_.is_h_method() && !pre_warped) {
    require(homography_.has_value(), "config",
            "checkpoint has no homography; pass a pre-warped input");
    cond = geo::warp_image(source_view, *homography_, source_view.dim(1),
                           source_view.dim(2)).image;
  }

  const bool so = cfg_.method == "x-so" || cfg_.method == "h-so";
  const bool fork = cfg_.method == "x-fork" || cfg_.method == "h-fork";
  const bool seq = cfg_.method == "x-seq" || cfg_.method == "h-seq";

  if (cfg_.method == "h-regions") {
    const Tensor inpaint = infer_one("inpaint_g", cond, 0);
    const Tensor car = infer_one("car_g", mask_image(cond, masks_.m2), 0);
    Tensor comp = geo::composite_regions(inpaint, car, cond, masks_);
    res.image = infer_one("realism_g", comp, 0);
    res.composite = std::move(comp);
    return res;
  }
  if (seq) {
    res.image = infer_one("g1", cond, 0);
    res.segmap = infer_one("g2", res.image, 0);
    return res;
  }
  if (fork) {
    ad::Var in = ad::constant(single_batch(cond));
    std::vector<ad::Var> heads = net("g").forward(in, false, 0);
    res.image = from_batch(heads[0]->value, 0);
    res.segmap = from_batch(heads[1]->value, 0);
    return res;
  }
  if (so) {
    const Tensor stacked = infer_one("g", cond, 0);  // (6,H,W)
    const int h = stacked.dim(1), w = stacked.dim(2);
    Tensor img({3, h, w}), seg({3, h, w});
    std::copy(stacked.data(), stacked.data() + img.size(), img.data());
    std::copy(stacked.data() + img.size(), stacked.data() + 2 * img.size(), seg.data());
    res.image = std::move(img);
    res.segmap = std::move(seg);
    return res;
  }
  res.image = infer_one("g", cond, 0);
  return res;
}

double Trainer::test_l1(const std::vector<data::PairedSample>& samples) {
  require(!samples.empty(), "config", "test_l1 needs samples");
  double acc = 0.0;
  for (const auto& s : samples) {
    CondTarget ct = resolve_cond_target(s, cfg_);
    Tensor out;
    if (cfg_.method == "h-regions") {
      out = synthesize(ct.cond, true).image;
    } else {
      const std::string role = (cfg_.method == "x-seq" || cfg_.method == "h-seq") ? "g1" : "g";
      Tensor full = infer_one(role, ct.cond, 0);
      if (cfg_.method == "x-so" || cfg_.method == "h-so") {
        Tensor img({3, full.dim(1), full.dim(2)});
        std::copy(full.data(), full.data() + img.size(), img.data());
        full = std::move(img);
      }
      out = std::move(full);
    }
    acc += loss::l1_loss(out, ct.target_img);
  }
  return acc / static_cast<double>(samples.size());
}

// ------------------------------------------------------------ checkpoint ---

void Trainer::save_checkpoint(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "io", "cannot write checkpoint: " + path.string());
  const std::string config = cfg_.resolved_text();
  out << "XVCKPT1\n" << config.size() << "\n" << config;
  if (homography_) {
    out << "homography 1\n";
    out.precision(17);
    for (int i = 0; i < 9; ++i) {
      out << homography_->data()[static_cast<size_t>(i)] << (i == 8 ? "\n" : " ");
    }
  } else {
    out << "homography 0\n";
  }
  out << "phase " << phase_ << " step " << step_ << "\n";
  out << "nets " << nets_.size() << "\n";
  for (const auto& [role, netp] : nets_) {
    out << "net " << role << " " << netp->fingerprint() << "\n";
    auto tensors = netp->state_tensors();
    out << tensors.size() << "\n";
    for (auto& nt : tensors) write_tensor(out, nt.name, *nt.tensor);
    const nets::Adam& opt = *opts_.at(role);
    out << "adam " << opt.t() << " " << opt.params().size() << "\n";
    nets::Adam& mopt = *opts_.at(role);
    for (size_t i = 0; i < mopt.params().size(); ++i) {
      write_tensor(out, "m" + std::to_string(i), mopt.m()[i]);
      write_tensor(out, "v" + std::to_string(i), mopt.v()[i]);
    }
  }
  require(out.good(), "io", "short checkpoint write: " + path.string());
}

std::unique_ptr<Trainer> Trainer::load_checkpoint(const std::filesystem::path& path,
                                                  std::vector<data::PairedSample> dataset) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "io", "cannot open checkpoint: " + path.string());
  std::string magic;
  size_t config_len = 0;
  in >> magic >> config_len;
  require(magic == "XVCKPT1", "io", "bad checkpoint container: " + path.string());
  in.ignore(1);
  std::string config(config_len, '\0');
  in.read(config.data(), static_cast<std::streamsize>(config_len));
  TrainConfig cfg = TrainConfig::from_text(config);

  std::string key;
  int have_h = 0;
  in >> key >> have_h;
  require(key == "homography", "io", "malformed checkpoint header");
  std::optional<geo::Homography> h;
  if (have_h != 0) {
    std::array<double, 9> m{};
    for (auto& v : m) in >> v;
    h = geo::Homography(m);
  }
  auto trainer = std::make_unique<Trainer>(cfg, std::move(dataset), h);

  int64_t step = 0;
  int phase = 0;
  in >> key >> phase;
  require(key == "phase", "io", "malformed checkpoint header");
  in >> key >> step;
  require(key == "step", "io", "malformed checkpoint header");
  size_t net_count = 0;
  in >> key >> net_count;
  require(key == "nets" && net_count == trainer->nets_.size(), "state",
          "checkpoint net count mismatch");
  for (size_t n = 0; n < net_count; ++n) {
    std::string role, fp;
    in >> key >> role >> fp;
    require(key == "net", "io", "malformed checkpoint");
    auto it = trainer->nets_.find(role);
    require(it != trainer->nets_.end(), "state", "checkpoint role unknown: " + role);
    require(fp == it->second->fingerprint(), "state",
            "checkpoint fingerprint mismatch for " + role);
    size_t tcount = 0;
    in >> tcount;
    in.ignore(1);
    auto tensors = it->second->state_tensors();
    require(tcount == tensors.size(), "state", "checkpoint tensor count mismatch");
    for (auto& nt : tensors) read_tensor_into(in, nt.name, *nt.tensor);
    int64_t t = 0;
    size_t pcount = 0;
    in >> key >> t >> pcount;
    require(key == "adam", "io", "malformed checkpoint");
    in.ignore(1);
    nets::Adam& opt = *trainer->opts_.at(role);
    require(pcount == opt.params().size(), "state", "checkpoint optimizer mismatch");
    opt.set_t(t);
    for (size_t i = 0; i < pcount; ++i) {
      read_tensor_into(in, "m" + std::to_string(i), opt.m()[i]);
      read_tensor_into(in, "v" + std::to_string(i), opt.v()[i]);
    }
  }
  trainer->step_ = step;
  trainer->phase_ = phase;
  if (trainer->phase_ >= 3 && !trainer->data_.empty()) trainer->build_composites();
  return trainer;
}

}  // namespace xv::train
