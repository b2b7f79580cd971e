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
#include "mlnpose/layer.hpp"

#include "mlnpose/errors.hpp"

namespace mlnpose {

std::string_view to_string(FlopConvention convention) {
  return convention == FlopConvention::kMac2 ? "mac2" : "mac1";
}

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kInput:
      return "input";
    case LayerKind::kConv:
      return "conv";
    case LayerKind::kRelu:
      return "relu";
    case LayerKind::kMaxPool2:
      return "maxpool2";
    case LayerKind::kConcat:
      return "concat";
    case LayerKind::kSum:
      return "sum";
  }
  return "unknown";
}

void LayerSpec::validate() const {
  if (name.empty()) throw ConfigError("layer with empty name");
  const auto fail = [&](const std::string& why) {
    throw ConfigError("layer '" + name + "': " + why);
  };
  switch (kind) {
    case LayerKind::kInput:
      if (!inputs.empty()) fail("input layer takes no predecessors");
      break;
    case LayerKind::kConv:
      if (inputs.size() != 1) fail("conv takes exactly one input");
      if (conv.kernel_h < 1 || conv.kernel_w < 1) fail("kernel dims must be >= 1");
      if (conv.stride < 1) fail("stride must be >= 1");
      if (conv.padding < 0) fail("padding must be >= 0");
      if (conv.in_channels < 1 || conv.out_channels < 1) {
        fail("channel counts must be >= 1");
      }
      break;
    case LayerKind::kRelu:
    case LayerKind::kMaxPool2:
      if (inputs.size() != 1) fail("expects exactly one input");
      break;
    case LayerKind::kConcat:
    case LayerKind::kSum:
      if (inputs.size() < 2) fail("needs at least two inputs");
      break;
  }
}

LayerSpec make_conv(std::string name, std::string input, int kernel,
                    int in_channels, int out_channels, bool has_bias) {
  LayerSpec spec;
  spec.kind = LayerKind::kConv;
  spec.name = std::move(name);
  spec.inputs = {std::move(input)};
  spec.conv.kernel_h = kernel;
  spec.conv.kernel_w = kernel;
  spec.conv.in_channels = in_channels;
  spec.conv.out_channels = out_channels;
  spec.conv.stride = 1;
  spec.conv.padding = (kernel - 1) / 2;
  spec.conv.has_bias = has_bias;
  return spec;
}

std::int64_t layer_param_count(const LayerSpec& spec) {
  if (spec.kind != LayerKind::kConv) return 0;
  const ConvParams& c = spec.conv;
  return std::int64_t{c.kernel_h} * c.kernel_w * c.in_channels *
             c.out_channels +
         (c.has_bias ? c.out_channels : 0);
}

std::int64_t layer_flop_count(const LayerSpec& spec, const Shape& input_shape,
                              FlopConvention convention) {
  if (spec.kind != LayerKind::kConv) return 0;
  const Shape out = infer_output_shape(spec, {input_shape});
  const ConvParams& c = spec.conv;
  const std::int64_t positions = std::int64_t{out.n} * out.h * out.w;
  const std::int64_t macs = std::int64_t{c.kernel_h} * c.kernel_w *
                            c.in_channels * c.out_channels * positions;
  const std::int64_t per_mac = convention == FlopConvention::kMac2 ? 2 : 1;
  return per_mac * macs + (c.has_bias ? c.out_channels * positions : 0);
}

Shape infer_output_shape(const LayerSpec& spec,
                         const std::vector<Shape>& input_shapes) {
  const auto fail = [&](const std::string& why) {
    throw ShapeError("layer '" + spec.name + "': " + why);
  };
  if (spec.kind != LayerKind::kInput && input_shapes.size() != spec.inputs.size()) {
    fail("expected " + std::to_string(spec.inputs.size()) + " input shapes");
  }
  switch (spec.kind) {
    case LayerKind::kInput:
      if (input_shapes.size() != 1) fail("input layer needs its declared shape");
      return input_shapes.front();
    case LayerKind::kConv: {
      const Shape& in = input_shapes.front();
      const ConvParams& c = spec.conv;
      if (in.c != c.in_channels) {
        fail("input has " + std::to_string(in.c) + " channels, expected " +
             std::to_string(c.in_channels));
      }
      const int span_h = in.h + 2 * c.padding - c.kernel_h;
      const int span_w = in.w + 2 * c.padding - c.kernel_w;
      if (span_h < 0 || span_w < 0) fail("zero-sized output for " + in.str());
      return Shape{in.n, c.out_channels, span_h / c.stride + 1,
                   span_w / c.stride + 1};
    }
    case LayerKind::kRelu:
      return input_shapes.front();
    case LayerKind::kMaxPool2: {
      const Shape& in = input_shapes.front();
      if (in.h % 2 != 0 || in.w % 2 != 0) fail("odd spatial dims " + in.str());
      return Shape{in.n, in.c, in.h / 2, in.w / 2};
    }
    case LayerKind::kConcat: {
      Shape out = input_shapes.front();
      out.c = 0;
      for (const Shape& s : input_shapes) {
        if (s.n != out.n || s.h != out.h || s.w != out.w) {
          fail("spatial mismatch " + s.str() + " vs " + input_shapes.front().str());
        }
        out.c += s.c;
      }
      return out;
    }
    case LayerKind::kSum:
      for (const Shape& s : input_shapes) {
        if (!(s == input_shapes.front())) {
          fail("sum inputs differ: " + s.str() + " vs " +
               input_shapes.front().str());
        }
      }
      return input_shapes.front();
  }
  fail("unknown layer kind");
  return {};
}

}  // namespace mlnpose
