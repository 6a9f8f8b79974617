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

#include "xv/metrics/classifier.hpp"

#include <sstream>

#include "xv/nets/adam.hpp"

namespace xv::metrics {

namespace {

Tensor stack_images(const std::vector<Tensor>& images, size_t i0, size_t i1) {
  require(i1 > i0, "shape", "empty image batch");
  const Tensor& first = images[i0];
  require(first.rank() == 3, "shape", "classifier expects (3,H,W) images");
  Tensor batch({static_cast<int>(i1 - i0), first.dim(0), first.dim(1), first.dim(2)});
  const int64_t sz = first.size();
  for (size_t i = i0; i < i1; ++i) {
    require(images[i].same_shape(first), "shape", "classifier batch images must share shape");
    std::copy(images[i].data(), images[i].data() + sz,
              batch.data() + static_cast<int64_t>(i - i0) * sz);
  }
  return batch;
}

Tensor gaussian_init(std::vector<int> shape, double sd, Rng& rng) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.gaussian(0.0, sd));
  return t;
}

}  // namespace

std::string SceneClassifier::Spec::canonical() const {
  std::ostringstream os;
  os << "clf:in=" << in_channels << ",base=" << base_width << ",classes=" << classes;
  return os.str();
}

SceneClassifier::SceneClassifier(const Spec& spec, uint64_t init_seed) : spec_(spec) {
  require(spec_.classes >= 2 && spec_.base_width > 0, "config", "bad classifier spec");
  Rng rng(derive_seed(init_seed, 0x636c6673ULL));
  // Four stride-2 blocks: 64 -> 4, 256 -> 16; GAP handles the rest.
  const int widths[4] = {spec_.base_width, spec_.base_width * 2, spec_.base_width * 4,
                         spec_.base_width * 4};
  int c_prev = spec_.in_channels;
  for (int i = 0; i < 4; ++i) {
    Block blk;
    const std::string prefix = "blk" + std::to_string(i);
    blk.w = add_param(prefix + ".w", gaussian_init({widths[i], c_prev, 4, 4}, 0.05, rng));
    blk.b = add_param(prefix + ".b", Tensor({widths[i]}, 0.0f));
    if (i > 0) {
      nets::BnState bn;
      bn.gamma = add_param(prefix + ".gamma", Tensor({widths[i]}, 1.0f));
      bn.beta = add_param(prefix + ".beta", Tensor({widths[i]}, 0.0f));
      bn.run_mean = Tensor({widths[i]}, 0.0f);
      bn.run_var = Tensor({widths[i]}, 1.0f);
      blk.bn = std::move(bn);
    }
    blocks_.push_back(std::move(blk));
    c_prev = widths[i];
  }
  fc_w_ = add_param("fc.w", gaussian_init({spec_.classes, spec_.feature_dim()}, 0.05, rng));
  fc_b_ = add_param("fc.b", Tensor({spec_.classes}, 0.0f));
  for (size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].bn) {
      add_state("blk" + std::to_string(i) + ".run_mean", &blocks_[i].bn->run_mean);
      add_state("blk" + std::to_string(i) + ".run_var", &blocks_[i].bn->run_var);
    }
  }
}

std::vector<ad::Var> SceneClassifier::forward(const ad::Var& input, bool training,
                                              uint64_t dropout_seed) {
  (void)dropout_seed;
  ad::Var x = input;
  for (auto& blk : blocks_) {
    x = ad::conv2d(x, blk.w, blk.b, 2, 1);
    if (blk.bn) {
      x = ad::batchnorm2d(x, blk.bn->gamma, blk.bn->beta, blk.bn->run_mean,
                          blk.bn->run_var, training);
    }
    x = ad::leaky_relu(x, 0.2);
  }
  ad::Var feats = ad::global_avg_pool(x);
  ad::Var logits = ad::linear(feats, fc_w_, fc_b_);
  return {logits, feats};
}

Tensor SceneClassifier::batch_forward(const std::vector<Tensor>& images, bool want_probs) {
  require(!images.empty(), "shape", "classifier got an empty image list");
  const int out_dim = want_probs ? spec_.classes : spec_.feature_dim();
  Tensor out({static_cast<int>(images.size()), out_dim});
  constexpr size_t kBatch = 16;
  for (size_t i0 = 0; i0 < images.size(); i0 += kBatch) {
    const size_t i1 = std::min(images.size(), i0 + kBatch);
    ad::Var in = ad::constant(stack_images(images, i0, i1));
    std::vector<ad::Var> heads = forward(in, false, 0);
    const Tensor vals = want_probs ? ad::softmax_rows(heads[0]->value) : heads[1]->value;
    std::copy(vals.data(), vals.data() + vals.size(),
              out.data() + static_cast<int64_t>(i0) * out_dim);
  }
  return out;
}

Tensor SceneClassifier::probs(const std::vector<Tensor>& images) {
  return batch_forward(images, true);
}

Tensor SceneClassifier::acts(const std::vector<Tensor>& images) {
  return batch_forward(images, false);
}

SceneClassifier::TrainStats SceneClassifier::fit(const std::vector<Tensor>& images,
                                                 const std::vector<int>& labels,
                                                 int steps, int batch_size, double lr,
                                                 uint64_t seed) {
  require(!images.empty() && images.size() == labels.size(), "config",
          "fit needs one label per image");
  nets::Adam opt(param_vars(), lr, 0.9, 0.999);
  Rng order_rng(derive_seed(seed, 0x6f726465ULL));
  TrainStats stats;
  const int n = static_cast<int>(images.size());
  for (int step = 0; step < steps; ++step) {
    std::vector<Tensor> batch;
    std::vector<int> batch_labels;
    for (int b = 0; b < batch_size; ++b) {
      const int idx = order_rng.uniform_int(0, n - 1);
      batch.push_back(images[static_cast<size_t>(idx)]);
      batch_labels.push_back(labels[static_cast<size_t>(idx)]);
    }
    ad::Var in = ad::constant(stack_images(batch, 0, batch.size()));
    ad::Var logits = forward(in, true, derive_seed(seed, 0x647270ULL, static_cast<uint64_t>(step)))[0];
    ad::Var loss = ad::softmax_cross_entropy(logits, batch_labels);
    opt.zero_grad();
    ad::backward(loss);
    opt.step();
    stats.final_loss = loss->value[0];
  }
  // Training-set accuracy as a sanity signal.
  const Tensor p = probs(images);
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    int best = 0;
    for (int j = 1; j < spec_.classes; ++j) {
      if (p.at(i, j) > p.at(i, best)) best = j;
    }
    if (best == labels[static_cast<size_t>(i)]) ++hits;
  }
  stats.train_accuracy = 100.0 * hits / n;
  return stats;
}

}  // namespace xv::metrics
