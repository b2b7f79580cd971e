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
#include <span>
#include <string>
#include <vector>

#include "mlnpose/tensor.hpp"

namespace mlnpose {

// "MLNT" tensor file: 4 magic bytes, u32 version, 4 x u32 dims (N, C, H, W),
// then N*C*H*W float32 values. All integers and floats little-endian.
inline constexpr std::uint32_t kTensorFormatVersion = 1;

std::vector<char> encode_tensor(const Tensor& tensor);
Tensor decode_tensor(std::span<const char> bytes);

void save_tensor(const std::string& path, const Tensor& tensor);
Tensor load_tensor(const std::string& path);

/// Reads a binary PPM (P6, maxval 255) into a 1x3xHxW tensor scaled to
/// [-0.5, 0.5): value / 256 - 0.5.
Tensor load_ppm(const std::string& path);
void save_ppm(const std::string& path, int width, int height,
              std::span<const std::uint8_t> rgb);

}  // namespace mlnpose
