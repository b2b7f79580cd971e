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
#include "mlnpose/synth.hpp"
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mlnpose/config.hpp"
#include "mlnpose/layer.hpp"
#include "mlnpose/tensor.hpp"

namespace mlnpose::cli {

/// Options shared by every subcommand.
struct RunConfig {
  std::string command;
  std::filesystem::path config_path;  // empty: built-in defaults
  std::filesystem::path out;
  std::uint64_t seed = 1;
  int threads = 1;
  std::optional<bool> filters;  // overrides decode.filters_enabled
  FlopConvention flop_convention = FlopConvention::kMac2;
};

/// The config file named by `run`, with the CLI overrides applied. Throws
/// std::runtime_error when the file is missing.
PipelineConfig resolve_config(const RunConfig& run);

/// Writes <out>/annotations.json and <out>/maps/<id>_joints.mlnt,
/// <id>_limbs.mlnt. Scene i uses derive_seed(run.seed, i); a person count
/// of 0 draws it from the configured range.
void cmd_synth(const RunConfig& run, int n_scenes, int people, std::ostream& log);

/// Renders ideal maps for every image of an annotation file into <out>.
void cmd_render_gt(const RunConfig& run, const std::filesystem::path& annotations,
                   std::ostream& log);

/// Runs the network on a PPM (P6) or MLNT image and writes
/// <out>/joints.mlnt and <out>/limbs.mlnt. Without a weight file the
/// weights are random from run.seed.
void cmd_forward(const RunConfig& run, const std::optional<std::filesystem::path>& weights,
                 const std::filesystem::path& image, std::ostream& log);

struct MapPair {
  int image_id = 0;
  std::filesystem::path joints;
  std::filesystem::path limbs;
};

/// Every <id>_joints.mlnt with a matching <id>_limbs.mlnt, by image id.
std::vector<MapPair> find_map_pairs(const std::filesystem::path& dir);

/// Decodes each map pair into a COCO results array, written to run.out
/// (or `log` when out is empty).
void cmd_decode(const RunConfig& run, const std::vector<MapPair>& maps, std::ostream& log);

/// Prints the metrics table; writes the JSON report to run.out if set.
void cmd_eval(const RunConfig& run, const std::filesystem::path& results,
              const std::filesystem::path& annotations, std::ostream& log);

/// Prints model size, parameter count and FLOPs (both conventions, the
/// selected one first); writes the JSON report to run.out if set.
void cmd_complexity(const RunConfig& run, int height, int width, bool per_layer,
                    std::ostream& log);

struct StageStats {
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p99_ms = 0.0;
};

struct StageTimes {
  double nms_ms = 0.0;
  double scoring_ms = 0.0;  // connection scoring and greedy matching
  double assembly_ms = 0.0;
};

/// One decode of in-memory maps with each stage timed separately.
StageTimes time_decode(const Tensor& joint_maps, const Tensor& limb_maps,
                       const SkeletonDef& def, const DecodeParams& params);

StageStats summarize(std::vector<double> samples_ms);

struct BenchReport {
  int scenes = 0;
  int people = 0;
  int repetitions = 0;
  StageStats nms;
  StageStats scoring;
  StageStats assembly;
  StageStats grouping;  // scoring + assembly
};

/// Decodes ideal maps of `scenes` synthetic scenes with `people` people,
/// `repetitions` times each. Only the in-memory decode is timed.
BenchReport run_bench(const PipelineConfig& cfg, std::uint64_t seed, int scenes, int people,
                      int repetitions);

void cmd_bench(const RunConfig& run, int scenes, int people, int repetitions,
               std::ostream& log);

}  // namespace mlnpose::cli
