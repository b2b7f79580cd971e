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
#pragma once

#include <span>
#include <vector>

#include "mlnpose/tensor.hpp"

namespace mlnpose {

/// 2-D cross-correlation (no kernel flip). `weights` has shape
/// (cout, cin, kh, kw); `bias` is either empty or holds cout values.
/// Accumulation is done in double precision. Output channels are split across
/// `threads` workers; every output value is computed by the same sequence of
/// operations regardless of the thread count.
Tensor conv2d(const Tensor& input, const Tensor& weights,
              std::span<const float> bias, int stride = 1, int padding = 0,
              int threads = 1);

Tensor relu(const Tensor& input);

/// 2x2 max pooling with stride 2. Requires even height and width.
Tensor maxpool2(const Tensor& input);

/// Concatenates along the channel axis, preserving input order.
Tensor concat_channels(std::span<const Tensor* const> inputs);
Tensor concat_channels(const std::vector<Tensor>& inputs);

/// Channels [begin, begin + count) of `input`.
Tensor slice_channels(const Tensor& input, int begin, int count);

/// Elementwise sum of equally shaped tensors.
Tensor add(std::span<const Tensor* const> inputs);

}  // namespace mlnpose
