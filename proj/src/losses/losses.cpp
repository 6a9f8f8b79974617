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

#include "xv/losses/losses.hpp"

#include <sstream>

namespace xv::loss {

std::string LossReport::csv_header() { return "step,adv_d,adv_g,l1_img,l1_seg,total"; }

std::string LossReport::csv_row(int64_t step) const {
  std::ostringstream os;
  os.precision(10);
  os << step << "," << adv_d << "," << adv_g << "," << l1_img << "," << l1_seg
     << "," << total;
  return os.str();
}

ad::Var adv_loss_d(const ad::Var& real_scores, const ad::Var& fake_scores,
                   double smooth) {
  require(smooth > 0.0 && smooth <= 1.0, "config",
          "real-label smoothing value must lie in (0,1]");
  ad::Var real_term = ad::bce_with_target(real_scores, smooth);
  ad::Var fake_term = ad::bce_with_target(fake_scores, 0.0);
  return ad::weighted_sum({real_term, fake_term}, {1.0, 1.0});
}

ad::Var adv_loss_g(const ad::Var& fake_scores) {
  return ad::neg_mean_log(fake_scores);
}

ad::Var l1_loss(const ad::Var& x, const ad::Var& y, const Tensor* mask) {
  return ad::l1_mean(x, y, mask);
}

Objective pix2pix_objective(const ad::Var& d_scores_on_fake, const ad::Var& img,
                            const ad::Var& img_true, const LossWeights& w) {
  w.validate();
  ad::Var adv = adv_loss_g(d_scores_on_fake);
  ad::Var l1 = l1_loss(img, img_true);
  Objective obj;
  obj.total = ad::weighted_sum({adv, l1}, {w.lambda1, w.lambda2});
  obj.report.adv_g = adv->value[0];
  obj.report.l1_img = l1->value[0];
  // Reported totals recombine the components in double; the float tape value
  // is for gradients only.
  obj.report.total = w.lambda1 * obj.report.adv_g + w.lambda2 * obj.report.l1_img;
  return obj;
}

Objective fork_objective(const ad::Var& d_scores_on_fake, const ad::Var& img,
                         const ad::Var& img_true, const ad::Var& seg,
                         const ad::Var& seg_true, const LossWeights& w) {
  w.validate();
  // The segmentation head never reaches the discriminator: d_scores_on_fake
  // is computed on the image head upstream, so the adversarial gradient with
  // respect to the seg head is structurally zero.
  ad::Var adv = adv_loss_g(d_scores_on_fake);
  ad::Var l1i = l1_loss(img, img_true);
  ad::Var l1s = l1_loss(seg, seg_true);
  Objective obj;
  obj.total = ad::weighted_sum({adv, l1i, l1s}, {w.lambda1, w.lambda2, w.lambda2});
  obj.report.adv_g = adv->value[0];
  obj.report.l1_img = l1i->value[0];
  obj.report.l1_seg = l1s->value[0];
  obj.report.total = w.lambda1 * obj.report.adv_g + w.lambda2 * obj.report.l1_img +
                     w.lambda2 * obj.report.l1_seg;
  return obj;
}

Objective seq_objective(const Objective& stage1, const Objective& stage2) {
  Objective obj;
  obj.total = ad::weighted_sum({stage1.total, stage2.total}, {1.0, 1.0});
  obj.report.adv_g = stage1.report.adv_g + stage2.report.adv_g;
  obj.report.l1_img = stage1.report.l1_img;
  // Stage 2 synthesizes the segmentation map; its pixel term lands there.
  obj.report.l1_seg = stage2.report.l1_img + stage2.report.l1_seg;
  obj.report.total = stage1.report.total + stage2.report.total;
  return obj;
}

Objective realism_objective(const ad::Var& out, const ad::Var& composite_in,
                            const ad::Var& d_scores, const Tensor& band_mask,
                            const LossWeights& w) {
  w.validate();
  Tensor keep = band_mask;  // complement: pixel term applies outside the bands
  for (int64_t i = 0; i < keep.size(); ++i) keep[i] = band_mask[i] > 0.5f ? 0.0f : 1.0f;
  ad::Var adv = adv_loss_g(d_scores);
  ad::Var l1 = l1_loss(out, composite_in, &keep);
  Objective obj;
  obj.total = ad::weighted_sum({adv, l1}, {w.lambda1, w.lambda2});
  obj.report.adv_g = adv->value[0];
  obj.report.l1_img = l1->value[0];
  obj.report.total = w.lambda1 * obj.report.adv_g + w.lambda2 * obj.report.l1_img;
  return obj;
}

double adv_loss_d(const Tensor& real_scores, const Tensor& fake_scores,
                  double smooth) {
  require(smooth > 0.0 && smooth <= 1.0, "config",
          "real-label smoothing value must lie in (0,1]");
  const double real_term =
      ad::bce_with_target(ad::constant(real_scores), smooth)->value[0];
  const double fake_term =
      ad::bce_with_target(ad::constant(fake_scores), 0.0)->value[0];
  return real_term + fake_term;
}

double adv_loss_g(const Tensor& fake_scores) {
  return adv_loss_g(ad::constant(fake_scores))->value[0];
}

double l1_loss(const Tensor& x, const Tensor& y, const Tensor* mask) {
  return l1_loss(ad::constant(x), ad::constant(y), mask)->value[0];
}

}  // namespace xv::loss
