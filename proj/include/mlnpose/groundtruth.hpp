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
#include <vector>

#include "mlnpose/skeleton.hpp"
#include "mlnpose/tensor.hpp"

namespace mlnpose {

struct GtConfig {
  double sigma = 7.0;            // Gaussian spread, input pixels
  double limb_half_width = 1.0;  // distance from the limb axis, output cells
  int output_stride = 8;         // input pixels per map cell

  void validate() const;
};

struct MapDims {
  int height = 0;
  int width = 0;
  bool operator==(const MapDims&) const = default;
};

/// Map dims for an image of `dims` at the given stride (floor division).
MapDims map_dims_for(ImageDims dims, int output_stride);

/// Input-pixel coordinate of the center of map cell `index`.
inline double cell_center(int index, int stride) { return (index + 0.5) * stride; }

/// Binary loss mask at map resolution; 0 marks cells excluded from the loss.
struct MaskMap {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> values;

  static MaskMap ones(MapDims dims);
  std::uint8_t at(int y, int x) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  /// Zeroes every cell whose center lies inside the pixel box.
  void clear_box(double x, double y, double w, double h, int stride);
};

/// Per cell: max over visible annotations of exp(-d^2 / sigma^2). Shape
/// (1, 1, H, W).
Tensor render_joint_map(std::span<const Person> people, int joint_type,
                        const GtConfig& cfg, MapDims dims);

/// 1 - max over the given joint maps (each (1, 1, H, W)).
Tensor render_background_map(std::span<const Tensor> joint_maps);

/// Shape (1, 2, H, W): unit vector from the limb's first joint toward its
/// second on cells within limb_half_width of the segment, averaged where
/// several people overlap, zero elsewhere.
Tensor render_paf(std::span<const Person> people, const SkeletonDef& def,
                  int limb_type, const GtConfig& cfg, MapDims dims);

/// (1, joint_channels, H, W): one map per joint type, then the background.
Tensor render_joint_stack(std::span<const Person> people,
                          const SkeletonDef& def, const GtConfig& cfg,
                          MapDims dims);

/// (1, 2n, H, W): limb j occupies channels 2j (x) and 2j + 1 (y).
Tensor render_paf_stack(std::span<const Person> people, const SkeletonDef& def,
                        const GtConfig& cfg, MapDims dims);

/// Sum over channels and cells of W(p) * (pred - gt)^2.
double joint_loss(const Tensor& pred, const Tensor& gt, const MaskMap& mask);
double limb_loss(const Tensor& pred, const Tensor& gt, const MaskMap& mask);

/// d loss / d pred = 2 W(p) (pred - gt).
Tensor loss_gradient(const Tensor& pred, const Tensor& gt, const MaskMap& mask);

}  // namespace mlnpose
