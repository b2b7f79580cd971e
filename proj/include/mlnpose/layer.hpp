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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mlnpose/tensor.hpp"

namespace mlnpose {

enum class LayerKind { kInput, kConv, kRelu, kMaxPool2, kConcat, kSum };

std::string_view to_string(LayerKind kind);

struct ConvParams {
  int kernel_h = 3;
  int kernel_w = 3;
  int in_channels = 0;
  int out_channels = 0;
  int stride = 1;
  int padding = 1;
  bool has_bias = true;
};

struct LayerSpec {
  LayerKind kind = LayerKind::kInput;
  std::string name;
  std::vector<std::string> inputs;
  ConvParams conv;  // meaningful only for kConv

  /// Throws ConfigError when conv dims, stride, padding or the input arity
  /// violate the layer invariants.
  void validate() const;
};

LayerSpec make_conv(std::string name, std::string input, int kernel,
                    int in_channels, int out_channels, bool has_bias = true);

/// Whether one multiply-accumulate counts as two FLOPs (the default) or one.
enum class FlopConvention { kMac2, kMac1 };

std::string_view to_string(FlopConvention convention);  // "mac2" / "mac1"

std::int64_t layer_param_count(const LayerSpec& spec);

/// FLOPs of a conv layer given its input shape. Non-conv layers count 0.
/// Under kMac2 a conv costs 2*kh*kw*cin*cout*Hout*Wout plus cout*Hout*Wout
/// for the bias; under kMac1 the multiply-accumulate term is halved.
std::int64_t layer_flop_count(const LayerSpec& spec, const Shape& input_shape,
                              FlopConvention convention = FlopConvention::kMac2);

/// Output shape of `spec` given the shapes of its inputs, in order.
Shape infer_output_shape(const LayerSpec& spec,
                         const std::vector<Shape>& input_shapes);

}  // namespace mlnpose
