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

#include <cmath>
#include <vector>

#include "xv/core/kernels.hpp"
#include "xv/nets/autodiff.hpp"

namespace xv::nets {

// Per-network Adam with bias correction; G and D each own one.
class Adam {
 public:
  Adam(std::vector<ad::Var> params, double lr, double beta1, double beta2,
       double eps = 1e-8)
      : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& p : params_) {
      m_.push_back(Tensor::zeros_like(p->value));
      v_.push_back(Tensor::zeros_like(p->value));
    }
  }

  void step() {
    ++t_;
    const float bc1 = static_cast<float>(1.0 - std::pow(beta1_, t_));
    const float bc2 = static_cast<float>(1.0 - std::pow(beta2_, t_));
    for (size_t i = 0; i < params_.size(); ++i) {
      ad::Var& p = params_[i];
      if (p->grad.empty()) continue;  // parameter unused this step
      kern::adam_step(p->value.size(), p->value.data(), p->grad.data(),
                      m_[i].data(), v_[i].data(), static_cast<float>(lr_),
                      static_cast<float>(beta1_), static_cast<float>(beta2_),
                      static_cast<float>(eps_), bc1, bc2);
    }
  }

  void zero_grad() { ad::zero_grad(params_); }

  int64_t t() const { return t_; }
  void set_t(int64_t t) { t_ = t; }
  std::vector<Tensor>& m() { return m_; }
  std::vector<Tensor>& v() { return v_; }
  const std::vector<ad::Var>& params() const { return params_; }

 private:
  std::vector<ad::Var> params_;
  std::vector<Tensor> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
};

}  // namespace xv::nets
