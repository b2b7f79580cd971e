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

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlnpose/decoder.hpp"
#include "mlnpose/groundtruth.hpp"
#include "mlnpose/network.hpp"
#include "mlnpose/skeleton.hpp"
#include "mlnpose/synth.hpp"

namespace mlnpose {

void to_json(nlohmann::json& j, const GtConfig& c);
void from_json(const nlohmann::json& j, GtConfig& c);

/// Everything a pipeline run reads from the JSON config document. Sections
/// that are absent keep their defaults.
struct PipelineConfig {
  SkeletonDef skeleton = default_skeleton();
  NetworkConfig network;
  GtConfig groundtruth;
  DecodeParams decode;
  SceneConfig scene;
  std::vector<double> oks_constants;  // empty selects the defaults

  /// Cross-section checks (strides agree, constants match the joint count).
  void validate() const;
};

void to_json(nlohmann::json& j, const PipelineConfig& c);
void from_json(const nlohmann::json& j, PipelineConfig& c);

PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace mlnpose
