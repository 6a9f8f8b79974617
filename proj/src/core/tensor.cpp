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

#include "xv/core/tensor.hpp"

#include <cmath>
#include <sstream>

namespace xv {

Tensor::Tensor(std::vector<int> shape, float fill) : shape_(std::move(shape)) {
  int64_t n = 1;
  for (int d : shape_) {
    require(d > 0, "shape", "tensor dimensions must be positive");
    n *= d;
  }
  data_.assign(static_cast<size_t>(n), fill);
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << ",";
    os << shape_[i];
  }
  os << ")";
  return os.str();
}

void Tensor::fill(float v) { data_.assign(data_.size(), v); }

bool Tensor::all_finite() const {
  for (float v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace xv
