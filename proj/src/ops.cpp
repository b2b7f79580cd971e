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
#include "mlnpose/ops.hpp"

#include <algorithm>
#include <cstring>

#include "mlnpose/errors.hpp"
#include "mlnpose/parallel.hpp"

namespace mlnpose {

namespace {

// Output channels computed together so each input row is reused from L1.
constexpr int kChannelBlock = 8;

int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
int ceil_div(int a, int b) { return -floor_div(-a, b); }

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weights,
              std::span<const float> bias, int stride, int padding,
              int threads) {
  const Shape& in = input.shape();
  const Shape& ws = weights.shape();
  if (stride < 1 || padding < 0) {
    throw ShapeError("conv2d: stride must be >= 1 and padding >= 0");
  }
  if (ws.h < 1 || ws.w < 1) {
    throw ShapeError("conv2d: kernel dims must be >= 1, got " + ws.str());
  }
  if (ws.c != in.c) {
    throw ShapeError("conv2d: input has " + std::to_string(in.c) +
                     " channels, kernel expects " + std::to_string(ws.c));
  }
  if (!bias.empty() && static_cast<int>(bias.size()) != ws.n) {
    throw ShapeError("conv2d: bias has " + std::to_string(bias.size()) +
                     " values for " + std::to_string(ws.n) + " filters");
  }
  const int span_h = in.h + 2 * padding - ws.h;
  const int span_w = in.w + 2 * padding - ws.w;
  if (span_h < 0 || span_w < 0 || ws.n == 0 || in.n == 0) {
    throw ShapeError("conv2d: zero-sized output for input " + in.str() +
                     " and kernel " + ws.str());
  }
  const int out_h = span_h / stride + 1;
  const int out_w = span_w / stride + 1;
  Tensor output(Shape{in.n, ws.n, out_h, out_w});

  const int blocks = (ws.n + kChannelBlock - 1) / kChannelBlock;
  const std::size_t tasks = static_cast<std::size_t>(in.n) * blocks;
  const auto in_data = input.data();
  const auto w_data = weights.data();
  const std::size_t kernel_plane = static_cast<std::size_t>(ws.h) * ws.w;
  const std::size_t filter_size = kernel_plane * ws.c;

  parallel_for(tasks, threads, [&](std::size_t task) {
    const int n = static_cast<int>(task / blocks);
    const int co_begin = static_cast<int>(task % blocks) * kChannelBlock;
    const int co_count = std::min(kChannelBlock, ws.n - co_begin);
    std::vector<double> acc(static_cast<std::size_t>(co_count) * out_w);

    for (int oy = 0; oy < out_h; ++oy) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int ci = 0; ci < in.c; ++ci) {
        const float* in_plane = in_data.data() + input.index(n, ci, 0, 0);
        for (int ky = 0; ky < ws.h; ++ky) {
          const int iy = oy * stride + ky - padding;
          if (iy < 0 || iy >= in.h) continue;
          const float* row = in_plane + static_cast<std::size_t>(iy) * in.w;
          for (int kx = 0; kx < ws.w; ++kx) {
            // ix = ox * stride + kx - padding must land in [0, in.w).
            const int ox_begin = std::max(0, ceil_div(padding - kx, stride));
            const int ox_end =
                std::min(out_w, floor_div(in.w - 1 + padding - kx, stride) + 1);
            if (ox_begin >= ox_end) continue;
            const float* src = row + (kx - padding);
            for (int b = 0; b < co_count; ++b) {
              const double w = w_data[(co_begin + b) * filter_size +
                                      ci * kernel_plane + ky * ws.w + kx];
              double* dst = acc.data() + static_cast<std::size_t>(b) * out_w;
              if (stride == 1) {
                for (int ox = ox_begin; ox < ox_end; ++ox) {
                  dst[ox] += w * static_cast<double>(src[ox]);
                }
              } else {
                for (int ox = ox_begin; ox < ox_end; ++ox) {
                  dst[ox] += w * static_cast<double>(src[ox * stride]);
                }
              }
            }
          }
        }
      }
      for (int b = 0; b < co_count; ++b) {
        const double bv = bias.empty() ? 0.0 : bias[co_begin + b];
        float* out_row = &output.at(n, co_begin + b, oy, 0);
        const double* src = acc.data() + static_cast<std::size_t>(b) * out_w;
        for (int ox = 0; ox < out_w; ++ox) {
          out_row[ox] = static_cast<float>(src[ox] + bv);
        }
      }
    }
  });
  return output;
}

Tensor relu(const Tensor& input) {
  Tensor out = input;
  for (float& v : out.data()) v = v > 0.0f ? v : 0.0f;
  return out;
}

Tensor maxpool2(const Tensor& input) {
  const Shape& s = input.shape();
  if (s.h % 2 != 0 || s.w % 2 != 0) {
    throw ShapeError("maxpool2: spatial dims must be even, got " + s.str());
  }
  Tensor out(Shape{s.n, s.c, s.h / 2, s.w / 2});
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      for (int y = 0; y < s.h / 2; ++y) {
        for (int x = 0; x < s.w / 2; ++x) {
          out.at(n, c, y, x) =
              std::max({input.at(n, c, 2 * y, 2 * x),
                        input.at(n, c, 2 * y, 2 * x + 1),
                        input.at(n, c, 2 * y + 1, 2 * x),
                        input.at(n, c, 2 * y + 1, 2 * x + 1)});
        }
      }
    }
  }
  return out;
}

Tensor concat_channels(std::span<const Tensor* const> inputs) {
  if (inputs.empty()) throw ShapeError("concat_channels: no inputs");
  const Shape& first = inputs.front()->shape();
  int channels = 0;
  for (const Tensor* t : inputs) {
    const Shape& s = t->shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w) {
      throw ShapeError("concat_channels: " + s.str() + " does not match " +
                       first.str());
    }
    channels += s.c;
  }
  Tensor out(Shape{first.n, channels, first.h, first.w});
  const std::size_t plane = first.plane_size();
  for (int n = 0; n < first.n; ++n) {
    int offset = 0;
    for (const Tensor* t : inputs) {
      const int c = t->shape().c;
      if (c > 0) {
        std::memcpy(&out.data()[out.index(n, offset, 0, 0)],
                    &t->data()[t->index(n, 0, 0, 0)],
                    sizeof(float) * plane * c);
      }
      offset += c;
    }
  }
  return out;
}

Tensor concat_channels(const std::vector<Tensor>& inputs) {
  std::vector<const Tensor*> ptrs;
  ptrs.reserve(inputs.size());
  for (const Tensor& t : inputs) ptrs.push_back(&t);
  return concat_channels(ptrs);
}

Tensor slice_channels(const Tensor& input, int begin, int count) {
  const Shape& s = input.shape();
  if (begin < 0 || count < 0 || begin + count > s.c) {
    throw ShapeError("slice_channels: [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") out of range for " +
                     s.str());
  }
  Tensor out(Shape{s.n, count, s.h, s.w});
  const std::size_t plane = s.plane_size();
  for (int n = 0; n < s.n; ++n) {
    if (count > 0) {
      std::memcpy(&out.data()[out.index(n, 0, 0, 0)],
                  &input.data()[input.index(n, begin, 0, 0)],
                  sizeof(float) * plane * count);
    }
  }
  return out;
}

Tensor add(std::span<const Tensor* const> inputs) {
  if (inputs.empty()) throw ShapeError("add: no inputs");
  Tensor out = *inputs.front();
  for (std::size_t i = 1; i < inputs.size(); ++i) {
    if (!(inputs[i]->shape() == out.shape())) {
      throw ShapeError("add: " + inputs[i]->shape().str() +
                       " does not match " + out.shape().str());
    }
    auto dst = out.data();
    auto src = inputs[i]->data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
  return out;
}

}  // namespace mlnpose
