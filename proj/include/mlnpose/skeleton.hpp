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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace mlnpose {

/// A directed joint pair; its PAF points from `from` toward `to`.
struct Limb {
  int from = 0;
  int to = 0;
  bool operator==(const Limb&) const = default;
};

/// Joint-type catalog plus the kinematic chain used for matching and
/// assembly. Limb order is the order in which the decoder processes limbs.
struct SkeletonDef {
  std::vector<std::string> joint_names;
  std::vector<Limb> limbs;
  bool background_channel = true;

  int num_joints() const { return static_cast<int>(joint_names.size()); }
  int num_limbs() const { return static_cast<int>(limbs.size()); }
  /// Joint heatmap channels, including the background channel if enabled.
  int joint_channels() const { return num_joints() + (background_channel ? 1 : 0); }
  /// Two vector components per limb.
  int limb_channels() const { return 2 * num_limbs(); }

  /// Index of `name`, or -1.
  int joint_index(const std::string& name) const;

  /// Throws ConfigError on out-of-range or duplicate limbs, or when the limb
  /// graph is disconnected over the joints it touches.
  void validate() const;

  bool operator==(const SkeletonDef&) const = default;
};

/// 18 joints (nose, neck, shoulders, elbows, wrists, hips, knees, ankles,
/// eyes, ears), 19 limbs, background channel on.
SkeletonDef default_skeleton();

/// Mirrors the COCO v flag: 0 absent, 1 labeled but occluded, 2 visible.
enum class Visibility { kAbsent = 0, kOccluded = 1, kVisible = 2 };

struct Keypoint {
  double x = 0.0;  // input pixels
  double y = 0.0;
  Visibility visibility = Visibility::kVisible;
  double confidence = 1.0;
  bool operator==(const Keypoint&) const = default;
};

/// One person; `keypoints[j]` is empty when joint type j is absent.
struct Person {
  std::vector<std::optional<Keypoint>> keypoints;

  Person() = default;
  explicit Person(int num_joints) : keypoints(static_cast<std::size_t>(num_joints)) {}

  int num_present() const;
  bool operator==(const Person&) const = default;
};

struct ImageDims {
  int width = 0;
  int height = 0;
};

struct Violation {
  enum class Kind { kJointCount, kOutOfBounds, kConfidenceRange, kAbsentFlag };
  Kind kind;
  int joint = -1;
  std::string message;
};

/// Empty result means the person is valid. Coordinates are in bounds when
/// 0 <= x <= width and 0 <= y <= height.
std::vector<Violation> validate_person(const Person& person,
                                       const SkeletonDef& def, ImageDims dims);

void to_json(nlohmann::json& j, const SkeletonDef& def);
void from_json(const nlohmann::json& j, SkeletonDef& def);

}  // namespace mlnpose
