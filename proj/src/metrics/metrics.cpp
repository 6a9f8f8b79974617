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

#include "xv/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "xv/core/image.hpp"
#include "xv/core/linalg.hpp"

namespace xv::metrics {

namespace {

constexpr double kProbFloor = 1e-12;

double kl_divergence(const std::vector<double>& q, const std::vector<double>& p) {
  double acc = 0.0;
  for (size_t j = 0; j < q.size(); ++j) {
    if (q[j] > 0.0) acc += q[j] * (std::log(q[j]) - std::log(std::max(p[j], kProbFloor)));
  }
  return acc;
}

std::vector<double> column_mean(const Tensor& m, int row0, int row1) {
  const int c = m.dim(1);
  std::vector<double> out(static_cast<size_t>(c), 0.0);
  for (int i = row0; i < row1; ++i) {
    for (int j = 0; j < c; ++j) out[static_cast<size_t>(j)] += m.at(i, j);
  }
  for (auto& v : out) v /= static_cast<double>(row1 - row0);
  return out;
}

std::vector<int> topk_indices(const float* row, int c, int k) {
  std::vector<int> idx(static_cast<size_t>(c));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return row[a] > row[b]; });
  idx.resize(static_cast<size_t>(k));
  return idx;
}

// Luminance plane in [0,255] (BT.601 weights).
Tensor luminance255(const Tensor& img) {
  require(img.rank() == 3 && img.dim(0) == 3, "shape", "expected (3,H,W) image");
  const int h = img.dim(1), w = img.dim(2);
  Tensor out({h, w});
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out.at(y, x) = 0.299f * img::to_255(img.at(0, y, x)) +
                     0.587f * img::to_255(img.at(1, y, x)) +
                     0.114f * img::to_255(img.at(2, y, x));
    }
  }
  return out;
}

std::vector<double> covariance(const Tensor& acts, std::vector<double>& mean) {
  const int n = acts.dim(0), d = acts.dim(1);
  mean.assign(static_cast<size_t>(d), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) mean[static_cast<size_t>(j)] += acts.at(i, j);
  }
  for (auto& v : mean) v /= static_cast<double>(n);
  std::vector<double> cov(static_cast<size_t>(d) * d, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a) {
      const double da = acts.at(i, a) - mean[static_cast<size_t>(a)];
      for (int b = a; b < d; ++b) {
        cov[static_cast<size_t>(a) * d + b] += da * (acts.at(i, b) - mean[static_cast<size_t>(b)]);
      }
    }
  }
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      const double v = cov[static_cast<size_t>(a) * d + b] / static_cast<double>(n);
      cov[static_cast<size_t>(a) * d + b] = v;
      cov[static_cast<size_t>(b) * d + a] = v;
    }
  }
  return cov;
}

// Symmetric PSD square root via Jacobi; negative eigenvalues beyond
// rel_tol of the largest magnitude are reported as errors.
std::vector<double> sqrtm_psd(std::vector<double> m, int d, double rel_tol,
                              double* trace_sqrt) {
  std::vector<double> w, v;
  linalg::jacobi_eigen_sym(d, m, w, v);
  double wmax = 0.0;
  for (double x : w) wmax = std::max(wmax, std::fabs(x));
  double tr = 0.0;
  std::vector<double> out(static_cast<size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) {
    double li = w[static_cast<size_t>(i)];
    if (li < 0.0) {
      require(wmax == 0.0 || -li <= rel_tol * wmax, "numeric",
              "matrix square root has a significant negative/imaginary component");
      li = 0.0;
    }
    const double s = std::sqrt(li);
    tr += s;
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        out[static_cast<size_t>(r) * d + c] +=
            s * v[static_cast<size_t>(r) * d + i] * v[static_cast<size_t>(c) * d + i];
      }
    }
  }
  if (trace_sqrt != nullptr) *trace_sqrt = tr;
  return out;
}

}  // namespace

void validate_prob_matrix(const Tensor& p) {
  require(p.rank() == 2 && p.dim(0) > 0 && p.dim(1) > 0, "shape",
          "probability matrix must be a non-empty (N,C) tensor");
  for (int i = 0; i < p.dim(0); ++i) {
    double s = 0.0;
    for (int j = 0; j < p.dim(1); ++j) {
      require(p.at(i, j) >= 0.0f, "numeric", "probability entries must be >= 0");
      s += p.at(i, j);
    }
    require(std::fabs(s - 1.0) <= 1e-6, "numeric",
            "probability row " + std::to_string(i) + " sums to " + std::to_string(s));
  }
}

void validate_activation_matrix(const Tensor& a) {
  require(a.rank() == 2 && a.dim(0) > 0 && a.dim(1) > 0, "shape",
          "activation matrix must be a non-empty (N,d) tensor");
  require(a.all_finite(), "numeric", "activation matrix has non-finite entries");
  if (a.dim(0) < a.dim(1) + 1) {
    std::cerr << "warning: only " << a.dim(0) << " activations for dimension "
              << a.dim(1) << "; covariance will be rank-deficient\n";
  }
}

Tensor load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "io", "cannot open matrix: " + path.string());
  int n = 0, c = 0;
  require(static_cast<bool>(in >> n >> c) && n > 0 && c > 0, "io",
          "matrix file needs a `N C` header: " + path.string());
  Tensor m({n, c});
  for (int64_t i = 0; i < m.size(); ++i) {
    require(static_cast<bool>(in >> m[i]), "io", "truncated matrix: " + path.string());
  }
  return m;
}

void save_matrix(const std::filesystem::path& path, const Tensor& m) {
  require(m.rank() == 2, "shape", "save_matrix wants (N,C)");
  std::ofstream out(path);
  require(out.good(), "io", "cannot write matrix: " + path.string());
  out << m.dim(0) << " " << m.dim(1) << "\n";
  out.precision(9);
  for (int i = 0; i < m.dim(0); ++i) {
    for (int j = 0; j < m.dim(1); ++j) out << m.at(i, j) << (j + 1 == m.dim(1) ? "\n" : " ");
  }
}

std::vector<double> topk_smooth(const std::vector<double>& p, int k) {
  const int c = static_cast<int>(p.size());
  require(k >= 1 && k <= c, "config",
          "top-k parameter must lie in [1, C]; got k=" + std::to_string(k));
  if (k == c) return p;
  std::vector<int> idx(p.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return p[static_cast<size_t>(a)] > p[static_cast<size_t>(b)]; });
  double top_mass = 0.0;
  for (int i = 0; i < k; ++i) top_mass += p[static_cast<size_t>(idx[static_cast<size_t>(i)])];
  const double eps = std::max(0.0, (1.0 - top_mass)) / static_cast<double>(c - k);
  std::vector<double> out(p.size(), eps);
  for (int i = 0; i < k; ++i) out[static_cast<size_t>(idx[static_cast<size_t>(i)])] = p[static_cast<size_t>(idx[static_cast<size_t>(i)])];
  return out;
}

Tensor topk_smooth_rows(const Tensor& probs, int k) {
  validate_prob_matrix(probs);
  Tensor out = probs;
  const int c = probs.dim(1);
  std::vector<double> row(static_cast<size_t>(c));
  for (int i = 0; i < probs.dim(0); ++i) {
    for (int j = 0; j < c; ++j) row[static_cast<size_t>(j)] = probs.at(i, j);
    const std::vector<double> sm = topk_smooth(row, k);
    for (int j = 0; j < c; ++j) out.at(i, j) = static_cast<float>(sm[static_cast<size_t>(j)]);
  }
  return out;
}

double inception_score(const Tensor& probs, int k, int splits) {
  validate_prob_matrix(probs);
  require(splits >= 1 && splits <= probs.dim(0), "config", "bad split count");
  const int n = probs.dim(0), c = probs.dim(1);
  const Tensor sm = k > 0 ? topk_smooth_rows(probs, k) : probs;

  double total = 0.0;
  for (int s = 0; s < splits; ++s) {
    const int row0 = static_cast<int>(static_cast<int64_t>(n) * s / splits);
    const int row1 = static_cast<int>(static_cast<int64_t>(n) * (s + 1) / splits);
    const std::vector<double> marginal = column_mean(sm, row0, row1);
    double mean_kl = 0.0;
    std::vector<double> row(static_cast<size_t>(c));
    for (int i = row0; i < row1; ++i) {
      for (int j = 0; j < c; ++j) row[static_cast<size_t>(j)] = sm.at(i, j);
      mean_kl += kl_divergence(row, marginal);
    }
    mean_kl /= static_cast<double>(row1 - row0);
    total += std::exp(mean_kl);
  }
  return total / static_cast<double>(splits);
}

double topk_accuracy(const Tensor& real, const Tensor& fake, int k, AccuracyMode mode) {
  validate_prob_matrix(real);
  validate_prob_matrix(fake);
  require(real.dim(0) == fake.dim(0) && real.dim(1) == fake.dim(1), "shape",
          "real/fake probability matrices must align");
  const int n = real.dim(0), c = real.dim(1);
  require(k >= 1 && k <= c, "config", "top-k parameter must lie in [1, C]");

  int considered = 0, hits = 0;
  for (int i = 0; i < n; ++i) {
    const float* rrow = real.data() + static_cast<int64_t>(i) * c;
    const int label = topk_indices(rrow, c, 1)[0];
    if (mode == AccuracyMode::kConfident && rrow[label] <= 0.5f) continue;
    ++considered;
    const std::vector<int> top = topk_indices(fake.data() + static_cast<int64_t>(i) * c, c, k);
    if (std::find(top.begin(), top.end(), label) != top.end()) ++hits;
  }
  require(considered > 0, "config",
          "no rows qualify for confident accuracy (0 of " + std::to_string(n) +
              " have top-1 > 0.5)");
  return 100.0 * static_cast<double>(hits) / static_cast<double>(considered);
}

MeanStd kl_model_data(const Tensor& fake, const Tensor& real, int batches) {
  validate_prob_matrix(fake);
  validate_prob_matrix(real);
  require(fake.dim(1) == real.dim(1), "shape", "class counts must match");
  require(batches >= 1 && batches <= fake.dim(0), "config",
          "batch count must lie in [1, N_fake]");
  const std::vector<double> p_real = column_mean(real, 0, real.dim(0));
  const int n = fake.dim(0);
  std::vector<double> scores;
  for (int b = 0; b < batches; ++b) {
    const int row0 = static_cast<int>(static_cast<int64_t>(n) * b / batches);
    const int row1 = static_cast<int>(static_cast<int64_t>(n) * (b + 1) / batches);
    scores.push_back(kl_divergence(column_mean(fake, row0, row1), p_real));
  }
  MeanStd ms;
  for (double s : scores) ms.mean += s;
  ms.mean /= static_cast<double>(scores.size());
  double var = 0.0;
  for (double s : scores) var += (s - ms.mean) * (s - ms.mean);
  ms.std = std::sqrt(var / static_cast<double>(scores.size()));
  return ms;
}

double ssim(const Tensor& x, const Tensor& y) {
  require(x.same_shape(y), "shape", "ssim inputs must share shape");
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);
  const Tensor lx = luminance255(x);
  const Tensor ly = luminance255(y);
  const int h = lx.dim(0), w = lx.dim(1);
  require(h >= kWin && w >= kWin, "shape",
          "ssim frame smaller than the 11x11 window");

  double g[kWin][kWin];
  double gsum = 0.0;
  for (int i = 0; i < kWin; ++i) {
    for (int j = 0; j < kWin; ++j) {
      const double di = i - (kWin - 1) / 2.0;
      const double dj = j - (kWin - 1) / 2.0;
      g[i][j] = std::exp(-(di * di + dj * dj) / (2.0 * kSigma * kSigma));
      gsum += g[i][j];
    }
  }
  for (auto& row : g) {
    for (double& v : row) v /= gsum;
  }

  double acc = 0.0;
  int64_t count = 0;
  for (int y0 = 0; y0 + kWin <= h; ++y0) {
    for (int x0 = 0; x0 + kWin <= w; ++x0) {
      double mx = 0, my = 0;
      for (int i = 0; i < kWin; ++i) {
        for (int j = 0; j < kWin; ++j) {
          mx += g[i][j] * lx.at(y0 + i, x0 + j);
          my += g[i][j] * ly.at(y0 + i, x0 + j);
        }
      }
      double vx = 0, vy = 0, vxy = 0;
      for (int i = 0; i < kWin; ++i) {
        for (int j = 0; j < kWin; ++j) {
          const double dx = lx.at(y0 + i, x0 + j) - mx;
          const double dy = ly.at(y0 + i, x0 + j) - my;
          vx += g[i][j] * dx * dx;
          vy += g[i][j] * dy * dy;
          vxy += g[i][j] * dx * dy;
        }
      }
      acc += ((2.0 * mx * my + kC1) * (2.0 * vxy + kC2)) /
             ((mx * mx + my * my + kC1) * (vx + vy + kC2));
      ++count;
    }
  }
  return acc / static_cast<double>(count);
}

double psnr(const Tensor& x, const Tensor& y) {
  require(x.same_shape(y), "shape", "psnr inputs must share shape");
  double mse = 0.0;
  for (int64_t i = 0; i < x.size(); ++i) {
    const double d = img::to_255(x[i]) - img::to_255(y[i]);
    mse += d * d;
  }
  mse /= static_cast<double>(x.size());
  if (mse <= 0.0) return 100.0;
  return std::min(100.0, 10.0 * std::log10(255.0 * 255.0 / mse));
}

double sharpness_difference(const Tensor& x, const Tensor& y) {
  require(x.same_shape(y) && x.rank() == 3, "shape",
          "sharpness_difference wants matching (C,H,W) images");
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  require(h >= 2 && w >= 2, "shape", "image too small for gradients");
  double acc = 0.0;
  int64_t count = 0;
  for (int ch = 0; ch < c; ++ch) {
    for (int i = 0; i + 1 < h; ++i) {
      for (int j = 0; j + 1 < w; ++j) {
        const double gx = std::fabs(img::to_255(x.at(ch, i + 1, j)) - img::to_255(x.at(ch, i, j))) +
                          std::fabs(img::to_255(x.at(ch, i, j + 1)) - img::to_255(x.at(ch, i, j)));
        const double gy = std::fabs(img::to_255(y.at(ch, i + 1, j)) - img::to_255(y.at(ch, i, j))) +
                          std::fabs(img::to_255(y.at(ch, i, j + 1)) - img::to_255(y.at(ch, i, j)));
        acc += std::fabs(gx - gy);
        ++count;
      }
    }
  }
  const double denom = acc / static_cast<double>(count);
  if (denom <= 0.0) return 100.0;
  return std::min(100.0, 10.0 * std::log10(255.0 * 255.0 / denom));
}

double fid(const Tensor& real_acts, const Tensor& fake_acts) {
  validate_activation_matrix(real_acts);
  validate_activation_matrix(fake_acts);
  require(real_acts.dim(1) == fake_acts.dim(1), "shape",
          "activation dimensions must match");
  const int d = real_acts.dim(1);
  constexpr double kEps = 1e-6;
  constexpr double kImagTol = 1e-3;

  std::vector<double> mu_r, mu_f;
  std::vector<double> cov_r = covariance(real_acts, mu_r);
  std::vector<double> cov_f = covariance(fake_acts, mu_f);
  for (int i = 0; i < d; ++i) {
    cov_r[static_cast<size_t>(i) * d + i] += kEps;
    cov_f[static_cast<size_t>(i) * d + i] += kEps;
  }

  double mean_term = 0.0;
  for (int i = 0; i < d; ++i) {
    const double dm = mu_r[static_cast<size_t>(i)] - mu_f[static_cast<size_t>(i)];
    mean_term += dm * dm;
  }
  double tr_r = 0.0, tr_f = 0.0;
  for (int i = 0; i < d; ++i) {
    tr_r += cov_r[static_cast<size_t>(i) * d + i];
    tr_f += cov_f[static_cast<size_t>(i) * d + i];
  }

  // Tr sqrt(Cr Cf) = Tr sqrt(S Cf S) with S = sqrt(Cr); the inner product is
  // symmetric PSD, so the eigen route never leaves the reals.
  const std::vector<double> s = sqrtm_psd(cov_r, d, kImagTol, nullptr);
  std::vector<double> inner(static_cast<size_t>(d) * d, 0.0);
  std::vector<double> tmp(static_cast<size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      double acc = 0.0;
      for (int k2 = 0; k2 < d; ++k2) acc += s[static_cast<size_t>(i) * d + k2] * cov_f[static_cast<size_t>(k2) * d + j];
      tmp[static_cast<size_t>(i) * d + j] = acc;
    }
  }
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      double acc = 0.0;
      for (int k2 = 0; k2 < d; ++k2) acc += tmp[static_cast<size_t>(i) * d + k2] * s[static_cast<size_t>(k2) * d + j];
      inner[static_cast<size_t>(i) * d + j] = acc;
    }
  }
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const double v = 0.5 * (inner[static_cast<size_t>(i) * d + j] + inner[static_cast<size_t>(j) * d + i]);
      inner[static_cast<size_t>(i) * d + j] = v;
      inner[static_cast<size_t>(j) * d + i] = v;
    }
  }
  double tr_sqrt = 0.0;
  sqrtm_psd(std::move(inner), d, kImagTol, &tr_sqrt);

  double out = mean_term + tr_r + tr_f - 2.0 * tr_sqrt;
  if (out < 0.0 && out > -1e-6) out = 0.0;
  return out;
}

// ---------------------------------------------------------------- report ----

const std::vector<std::string>& MetricReport::column_names() {
  static const std::vector<std::string> cols = {
      "inception_all", "inception_top1", "inception_top5",
      "acc_top1_all",  "acc_top1_0.5",   "acc_top5_all",  "acc_top5_0.5",
      "kl_mean",       "kl_std",         "ssim",          "psnr",
      "sd",            "fid"};
  return cols;
}

const std::vector<std::string>& MetricReport::table_labels() {
  static const std::vector<std::string> labels = {
      "Inception Score, all",   "Inception Score, Top-1", "Inception Score, Top-5",
      "Accuracy (Top-1, all)",  "Accuracy (Top-1, 0.5)",  "Accuracy (Top-5, all)",
      "Accuracy (Top-5, 0.5)",  "KL(model || data)",      "KL std",
      "SSIM",                   "PSNR",                   "SD",
      "FID Score"};
  return labels;
}

std::vector<double> MetricReport::values() const {
  return {is_all,       is_top1,      is_top5, acc_top1_all, acc_top1_conf,
          acc_top5_all, acc_top5_conf, kl_mean, kl_std,       ssim_v,
          psnr_v,       sd_v,          fid_v};
}

std::string MetricReport::to_csv() const {
  std::ostringstream os;
  const auto& cols = column_names();
  for (size_t i = 0; i < cols.size(); ++i) os << cols[i] << (i + 1 == cols.size() ? "\n" : ",");
  os.precision(8);
  const auto vals = values();
  for (size_t i = 0; i < vals.size(); ++i) {
    if (std::isnan(vals[i])) os << "--";
    else os << vals[i];
    os << (i + 1 == vals.size() ? "\n" : ",");
  }
  return os.str();
}

void MetricReport::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  require(out.good(), "io", "cannot write metrics: " + path.string());
  out << to_csv();
}

MetricReport MetricReport::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "io", "cannot open metrics: " + path.string());
  std::string header, row;
  require(static_cast<bool>(std::getline(in, header)) && static_cast<bool>(std::getline(in, row)),
          "io", "metrics csv needs a header and one row: " + path.string());
  std::vector<double> vals;
  std::istringstream rs(row);
  std::string cell;
  while (std::getline(rs, cell, ',')) {
    vals.push_back(cell == "--" ? std::nan("") : std::stod(cell));
  }
  require(vals.size() == column_names().size(), "io",
          "metrics csv column count mismatch: " + path.string());
  MetricReport r;
  r.is_all = vals[0];
  r.is_top1 = vals[1];
  r.is_top5 = vals[2];
  r.acc_top1_all = vals[3];
  r.acc_top1_conf = vals[4];
  r.acc_top5_all = vals[5];
  r.acc_top5_conf = vals[6];
  r.kl_mean = vals[7];
  r.kl_std = vals[8];
  r.ssim_v = vals[9];
  r.psnr_v = vals[10];
  r.sd_v = vals[11];
  r.fid_v = vals[12];
  return r;
}

// -------------------------------------------------------------- evaluate ----

MetricReport evaluate_with_matrices(const std::vector<Tensor>& fake_images,
                                    const std::vector<Tensor>& real_images,
                                    const Tensor& fake_probs, const Tensor& real_probs,
                                    const Tensor& fake_acts, const Tensor& real_acts,
                                    const EvalOptions& opt) {
  require(!fake_images.empty() && fake_images.size() == real_images.size(), "shape",
          "evaluate needs aligned non-empty image sets");
  MetricReport r;
  const int c = fake_probs.dim(1);
  r.is_all = inception_score(fake_probs, 0, opt.is_splits);
  r.is_top1 = inception_score(fake_probs, 1, opt.is_splits);
  r.is_top5 = inception_score(fake_probs, std::min(5, c), opt.is_splits);
  r.acc_top1_all = topk_accuracy(real_probs, fake_probs, 1, AccuracyMode::kAll);
  r.acc_top5_all = topk_accuracy(real_probs, fake_probs, std::min(5, c), AccuracyMode::kAll);
  // A classifier with no confident rows cannot fill the 0.5-threshold
  // columns; report them as missing ("--") instead of failing the battery.
  try {
    r.acc_top1_conf = topk_accuracy(real_probs, fake_probs, 1, AccuracyMode::kConfident);
    r.acc_top5_conf =
        topk_accuracy(real_probs, fake_probs, std::min(5, c), AccuracyMode::kConfident);
  } catch (const Error& e) {
    std::cerr << "warning: confident-accuracy columns unavailable: " << e.what() << "\n";
    r.acc_top1_conf = std::nan("");
    r.acc_top5_conf = std::nan("");
  }
  const int kl_batches = std::min(opt.kl_batches, fake_probs.dim(0));
  const MeanStd kl = kl_model_data(fake_probs, real_probs, kl_batches);
  r.kl_mean = kl.mean;
  r.kl_std = kl.std;

  double ssim_acc = 0, psnr_acc = 0, sd_acc = 0;
  for (size_t i = 0; i < fake_images.size(); ++i) {
    ssim_acc += ssim(fake_images[i], real_images[i]);
    psnr_acc += psnr(fake_images[i], real_images[i]);
    sd_acc += sharpness_difference(fake_images[i], real_images[i]);
  }
  const double n = static_cast<double>(fake_images.size());
  r.ssim_v = ssim_acc / n;
  r.psnr_v = psnr_acc / n;
  r.sd_v = sd_acc / n;
  r.fid_v = fid(real_acts, fake_acts);
  return r;
}

MetricReport evaluate(const std::vector<Tensor>& fake_images,
                      const std::vector<Tensor>& real_images,
                      ClassifierHandle& classifier, const EvalOptions& opt) {
  require(!fake_images.empty() && fake_images.size() == real_images.size(), "shape",
          "evaluate needs aligned non-empty image sets");
  const Tensor fake_probs = classifier.probs(fake_images);
  const Tensor real_probs = classifier.probs(real_images);
  const Tensor fake_acts = classifier.acts(fake_images);
  const Tensor real_acts = classifier.acts(real_images);
  return evaluate_with_matrices(fake_images, real_images, fake_probs, real_probs,
                                fake_acts, real_acts, opt);
}

}  // namespace xv::metrics
