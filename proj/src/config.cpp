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
#include "mlnpose/config.hpp"

#include <fstream>
#include <sstream>

#include "mlnpose/errors.hpp"

namespace mlnpose {

void to_json(nlohmann::json& j, const GtConfig& c) {
  j = {{"sigma", c.sigma},
       {"limb_half_width", c.limb_half_width},
       {"output_stride", c.output_stride}};
}

void from_json(const nlohmann::json& j, GtConfig& c) {
  try {
    const GtConfig d;
    c.sigma = j.value("sigma", d.sigma);
    c.limb_half_width = j.value("limb_half_width", d.limb_half_width);
    c.output_stride = j.value("output_stride", d.output_stride);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("groundtruth", e.what());
  }
  c.validate();
}

void PipelineConfig::validate() const {
  skeleton.validate();
  network.validate();
  groundtruth.validate();
  decode.validate();
  scene.validate();
  if (groundtruth.output_stride != decode.output_stride) {
    throw ConfigError("groundtruth.output_stride and decode.output_stride differ");
  }
  if (!oks_constants.empty() &&
      oks_constants.size() != static_cast<std::size_t>(skeleton.num_joints())) {
    throw ConfigError("oks_constants needs one value per joint (" +
                      std::to_string(skeleton.num_joints()) + ")");
  }
  for (double k : oks_constants) {
    if (!(k > 0.0)) throw ConfigError("oks_constants must be positive");
  }
}

void to_json(nlohmann::json& j, const PipelineConfig& c) {
  j = {{"skeleton", c.skeleton},   {"network", c.network}, {"groundtruth", c.groundtruth},
       {"decode", c.decode},       {"scene", c.scene},     {"oks_constants", c.oks_constants}};
}

void from_json(const nlohmann::json& j, PipelineConfig& c) {
  if (!j.is_object()) throw ParseError("config", "top level must be an object");
  c = PipelineConfig{};
  if (j.contains("skeleton")) c.skeleton = j.at("skeleton").get<SkeletonDef>();
  if (j.contains("network")) c.network = j.at("network").get<NetworkConfig>();
  if (j.contains("groundtruth")) c.groundtruth = j.at("groundtruth").get<GtConfig>();
  if (j.contains("decode")) c.decode = j.at("decode").get<DecodeParams>();
  if (j.contains("scene")) c.scene = j.at("scene").get<SceneConfig>();
  if (j.contains("oks_constants")) {
    try {
      c.oks_constants = j.at("oks_constants").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("oks_constants", e.what());
    }
  }
  c.validate();
}

PipelineConfig parse_config(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("byte " + std::to_string(e.byte), e.what());
  }
  return doc.get<PipelineConfig>();
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace mlnpose
