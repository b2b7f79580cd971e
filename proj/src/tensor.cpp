// Copyright 2026 The mlnpose Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "mlnpose/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "mlnpose/errors.hpp"

namespace mlnpose {

std::string Shape::str() const {
  return "(" + std::to_string(n) + ", " + std::to_string(c) + ", " +
         std::to_string(h) + ", " + std::to_string(w) + ")";
}

namespace {

void check_dims(const Shape& s) {
  if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0) {
    throw ShapeError("negative tensor dimension in " + s.str());
  }
}

}  // namespace

Tensor::Tensor(Shape shape, float fill) : shape_(shape) {
  check_dims(shape_);
  data_.assign(shape_.numel(), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(shape), data_(std::move(data)) {
  check_dims(shape_);
  if (data_.size() != shape_.numel()) {
    throw ShapeError("tensor payload has " + std::to_string(data_.size()) +
                     " values, shape " + shape_.str() + " needs " +
                     std::to_string(shape_.numel()));
  }
}

std::span<float> Tensor::plane(int n, int c) {
  return std::span<float>(data_).subspan(index(n, c, 0, 0),
                                         shape_.plane_size());
}

std::span<const float> Tensor::plane(int n, int c) const {
  return std::span<const float>(data_).subspan(index(n, c, 0, 0),
                                               shape_.plane_size());
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](float v) { return std::isfinite(v); });
}

}  // namespace mlnpose
