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

#include <cstdint>
#include <string>
#include <vector>

#include "xv/core/error.hpp"

namespace xv {

// Dense row-major float32 tensor. Images are (C,H,W), batches (N,C,H,W),
// matrices (rows, cols). Value semantics: copies are deep.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, float fill = 0.0f);

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }
  static Tensor scalar(float v) { return Tensor({1}, v); }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }

  float& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  float operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  // Indexed access for the common ranks; no bounds checks in release loops,
  // these are for tests and cold paths.
  float& at(int a, int b) { return data_[idx2(a, b)]; }
  float at(int a, int b) const { return data_[idx2(a, b)]; }
  float& at(int a, int b, int c) { return data_[idx3(a, b, c)]; }
  float at(int a, int b, int c) const { return data_[idx3(a, b, c)]; }
  float& at(int a, int b, int c, int d) { return data_[idx4(a, b, c, d)]; }
  float at(int a, int b, int c, int d) const { return data_[idx4(a, b, c, d)]; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_str() const;

  void fill(float v);
  bool all_finite() const;

 private:
  size_t idx2(int a, int b) const {
    return static_cast<size_t>(a) * shape_[1] + b;
  }
  size_t idx3(int a, int b, int c) const {
    return (static_cast<size_t>(a) * shape_[1] + b) * shape_[2] + c;
  }
  size_t idx4(int a, int b, int c, int d) const {
    return ((static_cast<size_t>(a) * shape_[1] + b) * shape_[2] + c) *
               shape_[3] +
           d;
  }

  std::vector<int> shape_;
  std::vector<float> data_;
};

}  // namespace xv
