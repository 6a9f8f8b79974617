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

#include "xv/core/tensor.hpp"

namespace xv::metrics {

// Probability / activation matrices are rank-2 tensors: one row per image.
void validate_prob_matrix(const Tensor& p);       // rows sum to 1 +- 1e-6
void validate_activation_matrix(const Tensor& a); // finite entries

// On-disk format: header line "N C" followed by N whitespace-separated rows.
Tensor load_matrix(const std::filesystem::path& path);
void save_matrix(const std::filesystem::path& path, const Tensor& m);

// Keeps the k largest entries, spreads the residual mass uniformly over the
// other C-k entries. k == C is the identity.
std::vector<double> topk_smooth(const std::vector<double>& p, int k);
Tensor topk_smooth_rows(const Tensor& probs, int k);

// exp(mean_i KL(p_i || marginal)) over smoothed rows; k <= 0 means no
// smoothing ("all classes"). splits > 1 averages the score over contiguous
// row groups.
double inception_score(const Tensor& probs, int k = 0, int splits = 1);

enum class AccuracyMode { kAll, kConfident };

// Real rows provide the labels (argmax); a fake row scores a hit when the
// label lands in its top-k. kConfident keeps only rows whose real top-1
// probability exceeds 0.5; with none qualifying this throws, reporting the
// count. Returns a percentage.
double topk_accuracy(const Tensor& real, const Tensor& fake, int k,
                     AccuracyMode mode);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population std over batches
};

// KL(model || data): fake rows are split into `batches` contiguous batches;
// each batch's mean distribution is compared against the real column mean.
MeanStd kl_model_data(const Tensor& fake, const Tensor& real, int batches);

// Images are (3,H,W) in [-1,1]; metrics operate on the 8-bit [0,255] scale.
// SSIM: 11x11 Gaussian window (sigma 1.5) on BT.601 luminance, K1=0.01,
// K2=0.03, L=255, valid windows only.
double ssim(const Tensor& x, const Tensor& y);
// 10*log10(255^2/MSE) over RGB; identical images cap at 100 dB.
double psnr(const Tensor& x, const Tensor& y);
// 10*log10(255^2 / mean |grad-mag(x) - grad-mag(y)|), forward differences
// over interior pixels; zero denominator caps at 100 dB.
double sharpness_difference(const Tensor& x, const Tensor& y);

// Frechet distance between Gaussian fits (population moments) with 1e-6
// diagonal regularization; the square root comes from eigendecomposing the
// symmetrized product, and a negative eigenvalue beyond 1e-3 of the largest
// is an error.
double fid(const Tensor& real_acts, const Tensor& fake_acts);

class ClassifierHandle {
 public:
  virtual ~ClassifierHandle() = default;
  virtual int num_classes() const = 0;
  virtual Tensor probs(const std::vector<Tensor>& images) = 0;  // (N,C)
  virtual Tensor acts(const std::vector<Tensor>& images) = 0;   // (N,d)
};

// One column per quantitative measure in the battery; NaN marks a metric a
// caller could not compute (rendered as "--").
struct MetricReport {
  double is_all = 0, is_top1 = 0, is_top5 = 0;
  double acc_top1_all = 0, acc_top1_conf = 0, acc_top5_all = 0, acc_top5_conf = 0;
  double kl_mean = 0, kl_std = 0;
  double ssim_v = 0, psnr_v = 0, sd_v = 0, fid_v = 0;

  static const std::vector<std::string>& column_names();
  static const std::vector<std::string>& table_labels();
  std::vector<double> values() const;
  std::string to_csv() const;  // header + one row
  void save_csv(const std::filesystem::path& path) const;
  static MetricReport load_csv(const std::filesystem::path& path);
};

struct EvalOptions {
  int kl_batches = 10;
  int is_splits = 1;
};

MetricReport evaluate(const std::vector<Tensor>& fake_images,
                      const std::vector<Tensor>& real_images,
                      ClassifierHandle& classifier, const EvalOptions& opt = {});

// Import path: precomputed matrices stand in for the classifier.
MetricReport evaluate_with_matrices(const std::vector<Tensor>& fake_images,
                                    const std::vector<Tensor>& real_images,
                                    const Tensor& fake_probs, const Tensor& real_probs,
                                    const Tensor& fake_acts, const Tensor& real_acts,
                                    const EvalOptions& opt = {});

}  // namespace xv::metrics
