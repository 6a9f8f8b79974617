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

#include <functional>
#include <memory>
#include <vector>

#include "xv/core/rng.hpp"
#include "xv/core/tensor.hpp"

namespace xv::ad {

// Small reverse-mode tape over Tensors. Graphs are built per step and
// dropped; parameters are long-lived leaves whose grads accumulate until
// zero_grad. Sharing a parameter Var in several places (fork decoder blocks,
// chained stages) just works: gradients accumulate at the leaf.

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
  Tensor value;
  Tensor grad;  // allocated on first touch, kept zero-sized otherwise
  bool requires_grad = false;
  std::vector<Var> parents;
  std::function<void(Node&)> backward_fn;

  Tensor& grad_buf();  // allocates zeros lazily
};

Var leaf(Tensor value, bool requires_grad = false);
inline Var constant(Tensor value) { return leaf(std::move(value), false); }
// Same value, cut from the graph.
Var detach(const Var& x);

// Seeds d(root)/d(root)=1 and runs reverse topological accumulation.
// root must be scalar (size 1).
void backward(const Var& root);
void zero_grad(const std::vector<Var>& params);

// --- structural ops ---
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var scale(const Var& x, double s);
Var concat_channels(const Var& a, const Var& b);      // (N,C,H,W) pairs
Var slice_channels(const Var& x, int c0, int c1);     // keeps [c0, c1)
Var mul_mask_hw(const Var& x, const Tensor& mask_hw); // broadcast over N,C

// --- layers ---
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);
Var conv_transpose2d(const Var& x, const Var& w, const Var& b, int stride,
                     int pad);
Var batchnorm2d(const Var& x, const Var& gamma, const Var& beta,
                Tensor& running_mean, Tensor& running_var, bool training,
                double momentum = 0.1, double eps = 1e-5);
Var leaky_relu(const Var& x, double slope);
Var relu(const Var& x);
Var tanh_act(const Var& x);
Var sigmoid(const Var& x);
Var dropout(const Var& x, double rate, Rng& rng, bool training);
Var global_avg_pool(const Var& x);  // (N,C,H,W) -> (N,C)
// y = x W^T + b with x (N,K), w (C,K), b (C).
Var linear(const Var& x, const Var& w, const Var& b);

// --- reductions / losses ---
Var sum_all(const Var& x);
Var mean_all(const Var& x);
// Mean |x-y| over the mask support (all elements when mask is null); the
// mask is (H,W), broadcast across batch and channels. Empty support throws.
Var l1_mean(const Var& x, const Var& y, const Tensor* mask_hw);
// Mean binary cross-entropy of scores against a constant target. Scores must
// lie in (0,1); the log arguments are clamped at 1e-7 for float safety.
Var bce_with_target(const Var& scores, double target);
// -mean(log s): non-saturating generator objective.
Var neg_mean_log(const Var& scores);
// Weighted sum of scalar nodes.
Var weighted_sum(const std::vector<Var>& xs, const std::vector<double>& ws);
// Mean softmax cross-entropy of (N,C) logits against integer labels.
Var softmax_cross_entropy(const Var& logits, const std::vector<int>& labels);

// Inference-only helper: row-wise softmax of an (N,C) value.
Tensor softmax_rows(const Tensor& logits);

}  // namespace xv::ad
