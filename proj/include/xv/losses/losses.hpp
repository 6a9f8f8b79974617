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

#include <optional>
#include <string>
#include <vector>

#include "xv/nets/autodiff.hpp"

namespace xv::loss {

struct LossWeights {
  double lambda1 = 1.0;    // adversarial weight
  double lambda2 = 100.0;  // pixel weight

  void validate() const {
    require(lambda1 >= 0.0 && lambda2 >= 0.0, "config",
            "loss weights must be non-negative");
  }
};

// Named scalar components of one objective evaluation; total is always the
// declared weighted sum of the parts.
struct LossReport {
  double adv_d = 0.0;
  double adv_g = 0.0;
  double l1_img = 0.0;
  double l1_seg = 0.0;
  double total = 0.0;

  static std::string csv_header();  // step,adv_d,adv_g,l1_img,l1_seg,total
  std::string csv_row(int64_t step) const;
};

// Tape forms (used by the trainer; gradients flow through the Vars).
// Discriminator objective: BCE(real -> smooth) + BCE(fake -> 0), mean over
// patch grid and batch, the two terms summed.
ad::Var adv_loss_d(const ad::Var& real_scores, const ad::Var& fake_scores,
                   double smooth);
// Non-saturating generator objective: -mean log D(fake).
ad::Var adv_loss_g(const ad::Var& fake_scores);
// Mean absolute difference, restricted to mask support when given.
ad::Var l1_loss(const ad::Var& x, const ad::Var& y,
                const Tensor* mask = nullptr);

struct Objective {
  ad::Var total;
  LossReport report;
};

// Eq-style combined objective: lambda1 * adv_g + lambda2 * L1(img).
Objective pix2pix_objective(const ad::Var& d_scores_on_fake, const ad::Var& img,
                            const ad::Var& img_true, const LossWeights& w);

// Fork objective: adversarial term sees the image head only; both heads take
// an L1 term at lambda2.
Objective fork_objective(const ad::Var& d_scores_on_fake, const ad::Var& img,
                         const ad::Var& img_true, const ad::Var& seg,
                         const ad::Var& seg_true, const LossWeights& w);

// Sequential objective: sum of two full stage objectives.
Objective seq_objective(const Objective& stage1, const Objective& stage2);

// Realism objective for the band-constrained pass: the pixel term copies
// everything outside the bands, pixels inside the bands are unconstrained.
Objective realism_objective(const ad::Var& out, const ad::Var& composite_in,
                            const ad::Var& d_scores, const Tensor& band_mask,
                            const LossWeights& w);

// Plain-tensor forms for direct evaluation (validation + tests).
double adv_loss_d(const Tensor& real_scores, const Tensor& fake_scores,
                  double smooth);
double adv_loss_g(const Tensor& fake_scores);
double l1_loss(const Tensor& x, const Tensor& y, const Tensor* mask = nullptr);

}  // namespace xv::loss
