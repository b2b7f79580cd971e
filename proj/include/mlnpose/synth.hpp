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
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mlnpose/evalkit.hpp"
#include "mlnpose/skeleton.hpp"
#include "mlnpose/tensor.hpp"

namespace mlnpose {

std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for scene `index` derived from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Small deterministic RNG: splitmix-seeded Mersenne Twister with
/// hand-rolled uniform/normal draws so sequences match across standard
/// libraries.
class SceneRng {
 public:
  explicit SceneRng(std::uint64_t seed);
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  int uniform_int(int lo, int hi);       // [lo, hi]
  double normal();

 private:
  std::mt19937_64 engine_;
};

struct SceneConfig {
  ImageDims image{432, 368};
  int min_people = 1;
  int max_people = 10;
  double min_limb_length = 14.0;  // px
  double max_limb_length = 28.0;
  /// Minimum distance between person centers and between any two limb
  /// segments of different people, px.
  double min_spacing = 20.0;
  double angle_jitter_deg = 20.0;
  std::uint64_t seed = 1;
  int max_attempts = 400;  // body placements tried per person

  void validate() const;
};

void to_json(nlohmann::json& j, const SceneConfig& c);
void from_json(const nlohmann::json& j, SceneConfig& c);

/// No arrangement satisfying the spacing could be found.
class InfeasibleSceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Samples a scene for the default 18-joint skeleton. Each body grows from
/// the neck outward along the kinematic tree with jittered canonical limb
/// directions and uniform limb lengths; bodies whose limbs (including
/// redundant ones) leave the length range are redrawn.
std::vector<Person> sample_scene(const SceneConfig& cfg, const SkeletonDef& def);
std::vector<Person> sample_scene(const SceneConfig& cfg, const SkeletonDef& def, int count);

/// Mean of a person's present keypoints.
std::pair<double, double> person_center(const Person& p);

/// Smallest distance between any limb segment of `a` and any of `b`.
double min_limb_distance(const Person& a, const Person& b, const SkeletonDef& def);

struct NoiseSpec {
  double sigma = 0.0;        // additive Gaussian noise on every value
  int false_peaks = 0;       // spurious bumps injected at random cells
  double false_peak_amplitude = 0.5;
  bool clamp_unit = true;    // clamp to [0, 1] (joint maps)
};

Tensor corrupt_maps(const Tensor& maps, const NoiseSpec& spec, std::uint64_t seed);

struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (row, col), sorted by row
  double total = 0.0;
};

inline constexpr int kMaxAssignmentSize = 10;

/// Maximum-total one-to-one assignment of size min(rows, cols), found by
/// exhaustive depth-first enumeration with an admissible bound. Throws
/// std::length_error beyond kMaxAssignmentSize on either side.
Assignment optimal_assignment(const std::vector<std::vector<double>>& scores);

/// COCO-subset ground truth for a list of scenes; image ids start at 1 and
/// area is the keypoint-extent box area.
GroundTruthStore scenes_to_store(const std::vector<std::vector<Person>>& scenes, ImageDims dims);

}  // namespace mlnpose
