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

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "xv/data/dataman.hpp"
#include "xv/losses/losses.hpp"
#include "xv/nets/adam.hpp"
#include "xv/nets/network.hpp"

namespace xv::train {

inline const std::vector<std::string>& method_names() {
  static const std::vector<std::string> m = {
      "x-pix2pix", "x-so", "x-fork", "x-seq", "h-pix2pix",
      "h-so",      "h-fork", "h-seq", "h-regions"};
  return m;
}

struct RegionConfig {
  geo::Rect r1, r2;
  int band_width = 8;
  // Defaults on a 256 frame: R1 = upper half, R2 = the hood rectangle
  // rows [184,256) x cols [64,192), band width 8; scaled linearly for other
  // frame sizes.
  static RegionConfig defaults_for(int frame);
};

struct TrainConfig {
  std::string method = "x-pix2pix";
  std::string direction = "a2g";  // h-* methods are a2g only
  int epochs = 0;  // 0: paper-style default (100 low-res, 35 high-res)
  int steps = 0;   // > 0 overrides epochs (desk-scale presets)
  int batch_size = 1;
  double lr = 2e-4;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  double smooth = 0.9;
  loss::LossWeights weights{1.0, 100.0};
  loss::LossWeights realism_weights{5.0, 2.0};
  uint64_t seed = 0;
  int resolution = 64;
  int base_width = 64;
  int block_trim = 0;
  bool skip_connections = false;  // U-net style skips in every generator
  int d_steps_per_g = 1;
  bool so_half_adv = false;  // halves the X-SO adversarial weight
  bool augment = false;
  int jitter_px = 30;
  int sub1_steps = 200, sub2_steps = 200, sub3_steps = 600;  // h-regions
  int band_width = -1;  // -1: RegionConfig default for this resolution

  bool is_h_method() const { return method.rfind("h-", 0) == 0; }
  bool uses_seg() const {
    return method == "x-so" || method == "x-fork" || method == "x-seq" ||
           method == "h-so" || method == "h-fork" || method == "h-seq";
  }
  void validate(bool have_homography) const;
  int total_steps(size_t dataset_size) const;

  std::string resolved_text() const;
  static TrainConfig from_text(const std::string& text);
  static TrainConfig from_file(const std::filesystem::path& path);
  void set_kv(const std::string& key, const std::string& value);  // unknown key -> error
};

struct StepLog {
  int64_t step = 0;
  loss::LossReport report;
};

// Conditioning/target resolution shared by training and synthesis: a2g
// conditions on the aerial image (or its homography warp for h-*) and
// targets the ground image; g2a swaps the two views.
struct CondTarget {
  Tensor cond;
  Tensor target_img;
  Tensor target_seg;
};
CondTarget resolve_cond_target(const data::PairedSample& s, const TrainConfig& cfg);

class Trainer {
 public:
  Trainer(TrainConfig cfg, std::vector<data::PairedSample> dataset,
          std::optional<geo::Homography> homography);

  // Runs the configured budget. For h-regions this is the three-subtask
  // pipeline; otherwise alternating D/G steps.
  void run();
  void run_steps(int n);  // non-h-regions advance; used by tests and resume

  const TrainConfig& config() const { return cfg_; }
  const std::vector<StepLog>& logs() const { return logs_; }
  int64_t step() const { return step_; }
  const RegionConfig& regions() const { return regions_; }

  nets::Network& net(const std::string& role);
  uint64_t param_hash(const std::string& role);
  std::vector<std::string> roles() const;

  void save_checkpoint(const std::filesystem::path& path) const;
  static std::unique_ptr<Trainer> load_checkpoint(
      const std::filesystem::path& path,
      std::vector<data::PairedSample> dataset = {});

  struct SynthesisResult {
    Tensor image;
    std::optional<Tensor> segmap;
    std::optional<Tensor> composite;  // h-regions intermediate
  };
  // source_view: the raw conditioning image in the source view; h-* methods
  // warp it internally unless pre_warped is set.
  SynthesisResult synthesize(const Tensor& source_view, bool pre_warped = false);

  // Mean inference-mode L1 between synthesized and target images.
  double test_l1(const std::vector<data::PairedSample>& samples);

  const std::optional<geo::Homography>& homography() const { return homography_; }

  const geo::RegionMaskSet& masks() const { return masks_; }
  const std::vector<Tensor>& composites() const { return composites_; }

  // Exposed for the D/G alternation property: one discriminator or one
  // generator update on the current batch (no step advance).
  struct BasicBatch {
    ad::Var cond, timg, tseg;
  };
  BasicBatch prepare_batch();
  double update_d(const std::string& d_role, const std::vector<std::string>& all_roles,
                  const ad::Var& cond, const ad::Var& target_cand,
                  const ad::Var& candidate);

 private:
  void make_nets();
  void train_basic_step();
  void train_seq_step();
  void run_h_regions();
  void h_subtask_step(const std::string& g_role, const std::string& d_role,
                      const Tensor* cond_mask, const Tensor* loss_mask,
                      bool realism, const std::vector<Tensor>* cond_override);
  void build_composites();
  Tensor infer_one(const std::string& role, const Tensor& input, int head);
  std::vector<int> batch_indices();
  Tensor batch_of(const std::vector<Tensor>& pool, const std::vector<int>& idx);
  void append_log(const loss::LossReport& report);
  void guard_finite(const loss::LossReport& report) const;

  TrainConfig cfg_;
  std::vector<data::PairedSample> data_;
  std::optional<geo::Homography> homography_;
  RegionConfig regions_;
  geo::RegionMaskSet masks_;
  // Pre-resolved per-sample tensors in id order.
  std::vector<Tensor> conds_, targets_img_, targets_seg_;
  std::vector<Tensor> composites_;  // h-regions, built between subtasks II/III

  std::map<std::string, std::unique_ptr<nets::Network>> nets_;
  std::map<std::string, std::unique_ptr<nets::Adam>> opts_;
  std::vector<StepLog> logs_;
  int64_t step_ = 0;
  int phase_ = 0;  // h-regions subtask progress (0..4)
};

}  // namespace xv::train
