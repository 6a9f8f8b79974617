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

#include "xv/metrics/metrics.hpp"
#include "xv/nets/network.hpp"

namespace xv::metrics {

// Desk-scale scene classifier: a small CNN over ground-view images whose
// penultimate pooled features provide the activation vectors for FID. Any
// classifier satisfying ClassifierHandle can replace it (or use precomputed
// matrices via evaluate_with_matrices).
class SceneClassifier : public nets::Network, public ClassifierHandle {
 public:
  struct Spec {
    int in_channels = 3;
    int base_width = 16;
    int classes = 8;
    int feature_dim() const { return base_width * 4; }
    std::string canonical() const;
  };

  explicit SceneClassifier(const Spec& spec, uint64_t init_seed = 0);

  // Network interface: heads are {logits (N,C), features (N,d)}.
  std::vector<ad::Var> forward(const ad::Var& input, bool training,
                               uint64_t dropout_seed) override;
  std::string kind() const override { return "classifier"; }
  std::string canonical_spec() const override { return spec_.canonical(); }

  // ClassifierHandle interface (inference mode, deterministic).
  int num_classes() const override { return spec_.classes; }
  Tensor probs(const std::vector<Tensor>& images) override;
  Tensor acts(const std::vector<Tensor>& images) override;

  struct TrainStats {
    double final_loss = 0.0;
    double train_accuracy = 0.0;  // percent, over the training set
  };
  TrainStats fit(const std::vector<Tensor>& images, const std::vector<int>& labels,
                 int steps, int batch_size, double lr, uint64_t seed);

 private:
  Tensor batch_forward(const std::vector<Tensor>& images, bool want_probs);

  struct Block {
    ad::Var w, b;
    std::optional<nets::BnState> bn;
  };
  Spec spec_;
  std::vector<Block> blocks_;
  ad::Var fc_w_, fc_b_;
};

}  // namespace xv::metrics
