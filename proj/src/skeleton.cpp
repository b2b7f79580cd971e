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
#include "mlnpose/skeleton.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "mlnpose/errors.hpp"

namespace mlnpose {

int SkeletonDef::joint_index(const std::string& name) const {
  const auto it = std::find(joint_names.begin(), joint_names.end(), name);
  return it == joint_names.end() ? -1
                                 : static_cast<int>(it - joint_names.begin());
}

void SkeletonDef::validate() const {
  const int m = num_joints();
  if (m == 0) throw ConfigError("skeleton has no joints");
  std::set<std::pair<int, int>> seen;
  std::vector<int> parent(static_cast<std::size_t>(m));
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::vector<bool> touched(static_cast<std::size_t>(m), false);
  for (std::size_t i = 0; i < limbs.size(); ++i) {
    const Limb& l = limbs[i];
    if (l.from < 0 || l.from >= m || l.to < 0 || l.to >= m) {
      throw ConfigError("limb " + std::to_string(i) + " references a joint outside [0, " +
                        std::to_string(m) + ")");
    }
    if (l.from == l.to) throw ConfigError("limb " + std::to_string(i) + " is a self loop");
    const auto key = std::minmax(l.from, l.to);
    if (!seen.insert(key).second) {
      throw ConfigError("limb " + std::to_string(i) + " duplicates an earlier limb");
    }
    touched[l.from] = touched[l.to] = true;
    parent[find(l.from)] = find(l.to);
  }
  int root = -1;
  for (int j = 0; j < m; ++j) {
    if (!touched[j]) continue;
    if (root < 0) root = find(j);
    if (find(j) != root) throw ConfigError("limb graph is not connected");
  }
}

SkeletonDef default_skeleton() {
  SkeletonDef def;
  def.joint_names = {"nose",       "neck",      "r_shoulder", "r_elbow",
                     "r_wrist",    "l_shoulder", "l_elbow",   "l_wrist",
                     "r_hip",      "r_knee",    "r_ankle",    "l_hip",
                     "l_knee",     "l_ankle",   "r_eye",      "l_eye",
                     "r_ear",      "l_ear"};
  def.limbs = {{1, 2},  {1, 5},   {2, 3},   {3, 4},   {5, 6},
               {6, 7},  {1, 8},   {8, 9},   {9, 10},  {1, 11},
               {11, 12}, {12, 13}, {1, 0},   {0, 14},  {14, 16},
               {0, 15}, {15, 17}, {2, 16},  {5, 17}};
  def.background_channel = true;
  return def;
}

int Person::num_present() const {
  return static_cast<int>(std::count_if(keypoints.begin(), keypoints.end(),
                                        [](const auto& k) { return k.has_value(); }));
}

std::vector<Violation> validate_person(const Person& person,
                                       const SkeletonDef& def, ImageDims dims) {
  std::vector<Violation> out;
  if (!person.keypoints.empty() &&
      static_cast<int>(person.keypoints.size()) != def.num_joints()) {
    out.push_back({Violation::Kind::kJointCount, -1,
                   "person has " + std::to_string(person.keypoints.size()) +
                       " keypoint slots, skeleton has " +
                       std::to_string(def.num_joints())});
    return out;
  }
  for (std::size_t j = 0; j < person.keypoints.size(); ++j) {
    if (!person.keypoints[j]) continue;
    const Keypoint& k = *person.keypoints[j];
    const int joint = static_cast<int>(j);
    if (!(k.x >= 0.0 && k.x <= dims.width && k.y >= 0.0 && k.y <= dims.height)) {
      out.push_back({Violation::Kind::kOutOfBounds, joint,
                     def.joint_names[j] + " at (" + std::to_string(k.x) + ", " +
                         std::to_string(k.y) + ") is outside the image"});
    }
    if (!(k.confidence >= 0.0 && k.confidence <= 1.0)) {
      out.push_back({Violation::Kind::kConfidenceRange, joint,
                     def.joint_names[j] + " confidence " +
                         std::to_string(k.confidence) + " is outside [0, 1]"});
    }
    if (k.visibility == Visibility::kAbsent) {
      out.push_back({Violation::Kind::kAbsentFlag, joint,
                     def.joint_names[j] + " is present but flagged absent"});
    }
  }
  return out;
}

void to_json(nlohmann::json& j, const SkeletonDef& def) {
  nlohmann::json limbs = nlohmann::json::array();
  for (const Limb& l : def.limbs) limbs.push_back({l.from, l.to});
  j = {{"joints", def.joint_names},
       {"limbs", limbs},
       {"background_channel", def.background_channel}};
}

void from_json(const nlohmann::json& j, SkeletonDef& def) {
  try {
    def.joint_names = j.at("joints").get<std::vector<std::string>>();
    def.limbs.clear();
    for (const auto& l : j.at("limbs")) {
      if (!l.is_array() || l.size() != 2) {
        throw ParseError("skeleton.limbs", "each limb must be a [from, to] pair");
      }
      def.limbs.push_back({l[0].get<int>(), l[1].get<int>()});
    }
    def.background_channel = j.value("background_channel", true);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("skeleton", e.what());
  }
  def.validate();
}

}  // namespace mlnpose
