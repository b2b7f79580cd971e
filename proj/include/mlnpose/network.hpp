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
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlnpose/layer.hpp"
#include "mlnpose/skeleton.hpp"
#include "mlnpose/tensor.hpp"

namespace mlnpose {

/// How the conv outputs inside a transfer/refinement block are combined into
/// the block output.
enum class Aggregation { kSum, kConcat };

/// Which detection-branch features feed the transfer sub-networks.
enum class TransferSource {
  kPenultimate,  // the 1x1 hidden layer right before each detection head
  kFeatures,     // the last 3x3 feature layer of each detection branch
};

/// Knobs for the multi-level network. Defaults reproduce the reference
/// configuration; see docs/reconstruction.md for how each was chosen.
struct NetworkConfig {
  int input_channels = 3;
  int backbone_convs = 10;  // prefix of the VGG-19 conv stack
  std::vector<int> reduction_channels = {256, 128};

  int branch_convs = 3;
  int branch_channels = 128;
  int head_hidden = 512;

  int transfer_blocks = 4;
  int refine_blocks = 7;
  int block_convs = 3;
  int block_channels = 128;
  Aggregation aggregation = Aggregation::kSum;
  TransferSource transfer_source = TransferSource::kPenultimate;
  bool refine_uses_transfer = true;
  int refine_head_hidden = 512;  // 0 puts the output head directly on the blocks

  // Optional explicit head sizes; 0 derives them from the skeleton.
  int joint_outputs = 0;
  int limb_outputs = 0;

  void validate() const;
  bool operator==(const NetworkConfig&) const = default;
};

void to_json(nlohmann::json& j, const NetworkConfig& cfg);
void from_json(const nlohmann::json& j, NetworkConfig& cfg);

struct NetworkGraph {
  std::vector<LayerSpec> layers;  // topological order, layers[0] is the input
  std::string input;
  std::string joint_output;
  std::string limb_output;
  std::string bifurcation;
  int input_channels = 3;
  int stride = 1;

  /// Index of the named layer, or -1.
  int find(const std::string& name) const;
  const LayerSpec& layer(const std::string& name) const;

  /// Unique names, resolvable and earlier-defined inputs, valid specs.
  void validate() const;

  /// Output shape of every layer for the given input shape.
  std::vector<Shape> infer_shapes(const Shape& input_shape) const;
};

NetworkGraph build_mln(const SkeletonDef& def, const NetworkConfig& cfg = {});

/// A conv weight slot is missing or not loadable.
class WeightError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LayerWeights {
  Tensor weights;           // (cout, cin, kh, kw)
  std::vector<float> bias;  // cout values, zeros for bias-free layers
  bool operator==(const LayerWeights&) const = default;
};

using WeightStore = std::map<std::string, LayerWeights>;

WeightStore zero_weights(const NetworkGraph& graph);

/// Uniform in +-sqrt(3 / fan_in) from a seeded 64-bit Mersenne Twister;
/// biases are small uniform values. Identical seeds give identical stores.
WeightStore random_weights(const NetworkGraph& graph, std::uint64_t seed);

/// Throws WeightError for missing slots, ShapeError for wrong shapes.
void validate_weights(const NetworkGraph& graph, const WeightStore& store);

struct ForwardResult {
  Tensor joint_maps;
  Tensor limb_maps;
};

ForwardResult forward(const NetworkGraph& graph, const WeightStore& weights,
                      const Tensor& image, int threads = 1);

/// Output of one named layer. Throws ConfigError for unknown layers.
Tensor dump_activation(const NetworkGraph& graph, const WeightStore& weights,
                       const Tensor& image, const std::string& layer_name,
                       int threads = 1);

struct LayerCost {
  std::string name;
  LayerKind kind = LayerKind::kInput;
  Shape output;
  std::int64_t params = 0;
  std::int64_t flops_mac2 = 0;
  std::int64_t flops_mac1 = 0;
};

struct ComplexityReport {
  Shape input;
  std::vector<LayerCost> layers;
  std::int64_t total_params = 0;
  std::int64_t total_flops_mac2 = 0;
  std::int64_t total_flops_mac1 = 0;

  std::int64_t total_flops(FlopConvention c) const {
    return c == FlopConvention::kMac2 ? total_flops_mac2 : total_flops_mac1;
  }
  /// Parameters stored as float32, in units of 1e6 bytes.
  double model_size_mb() const { return static_cast<double>(total_params) * 4.0 / 1e6; }
};

ComplexityReport complexity_report(const NetworkGraph& graph, const Shape& input_shape);

nlohmann::json to_json(const ComplexityReport& report, bool per_layer);

// "MLNW" weight file: magic, u32 version, u32 layer count, then per layer a
// u16 name length, the UTF-8 name, a u8 rank, rank x u32 dims and the f32
// payload (weights, then dims[0] bias values). Little-endian throughout.
inline constexpr std::uint32_t kWeightFormatVersion = 1;

std::vector<char> save_weights(const WeightStore& store);
WeightStore load_weights(std::span<const char> bytes);

}  // namespace mlnpose
