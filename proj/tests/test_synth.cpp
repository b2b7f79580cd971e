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
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mlnpose/errors.hpp"
#include "mlnpose/synth.hpp"
#include "oracles.hpp"

namespace mlnpose {
namespace {

const SkeletonDef& def() {
  static const SkeletonDef d = default_skeleton();
  return d;
}

TEST(RngTest, SeededSequencesRepeat) {
  SceneRng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
  EXPECT_NE(a.uniform(), c.uniform());
  for (int i = 0; i < 1000; ++i) {
    const int v = a.uniform_int(-2, 3);
    EXPECT_GE(v, -2);
    EXPECT_LE(v, 3);
  }
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_EQ(derive_seed(7, 5), derive_seed(7, 5));
}

TEST(SampleSceneTest, DeterministicInSeed) {
  SceneConfig cfg;
  cfg.seed = 1;
  const auto a = sample_scene(cfg, def(), 1);
  EXPECT_EQ(sample_scene(cfg, def(), 1), a);
  EXPECT_EQ(sample_scene(cfg, def()), sample_scene(cfg, def()));
  cfg.seed = 2;
  EXPECT_NE(sample_scene(cfg, def(), 1), a);
}

TEST(SampleSceneTest, ThousandScenesRespectBoundsLengthsAndSpacing) {
  SceneConfig cfg;
  int people = 0;
  for (int i = 0; i < 1000; ++i) {
    cfg.seed = derive_seed(99, static_cast<std::uint64_t>(i));
    const auto scene = sample_scene(cfg, def());
    ASSERT_GE(static_cast<int>(scene.size()), cfg.min_people);
    ASSERT_LE(static_cast<int>(scene.size()), cfg.max_people);
    people += static_cast<int>(scene.size());
    for (std::size_t p = 0; p < scene.size(); ++p) {
      const Person& person = scene[p];
      ASSERT_EQ(person.num_present(), 18);
      ASSERT_TRUE(validate_person(person, def(), cfg.image).empty());
      for (const Limb& l : def().limbs) {
        const auto& a = *person.keypoints[l.from];
        const auto& b = *person.keypoints[l.to];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        ASSERT_GE(len, cfg.min_limb_length - 1e-9);
        ASSERT_LE(len, cfg.max_limb_length + 1e-9);
      }
      for (std::size_t q = 0; q < p; ++q) {
        const auto [ax, ay] = person_center(person);
        const auto [bx, by] = person_center(scene[q]);
        ASSERT_GE(std::hypot(ax - bx, ay - by), cfg.min_spacing);
        ASSERT_GE(min_limb_distance(person, scene[q], def()), cfg.min_spacing);
      }
    }
  }
  EXPECT_GT(people, 4000);  // the count range is actually used
}

TEST(SampleSceneTest, RightSideIsOnImageLeft) {
  SceneConfig cfg;
  for (int i = 0; i < 50; ++i) {
    cfg.seed = static_cast<std::uint64_t>(i);
    for (const Person& p : sample_scene(cfg, def(), 1)) {
      EXPECT_LT(p.keypoints[2]->x, p.keypoints[5]->x);  // shoulders
      EXPECT_LT(p.keypoints[8]->x, p.keypoints[11]->x);  // hips
      EXPECT_LT(p.keypoints[0]->y, p.keypoints[1]->y);  // nose above neck
    }
  }
}

TEST(SampleSceneTest, InfeasibleSpacingThrows) {
  SceneConfig cfg;
  cfg.min_spacing = std::hypot(cfg.image.width, cfg.image.height) + 1.0;
  cfg.max_attempts = 20;
  EXPECT_THROW(sample_scene(cfg, def(), 2), InfeasibleSceneError);
  EXPECT_NO_THROW(sample_scene(cfg, def(), 1));
}

TEST(SceneConfigTest, ValidationAndJson) {
  SceneConfig cfg;
  cfg.min_spacing = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SceneConfig{};
  cfg.image.width = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SceneConfig{};
  cfg.seed = 123456789012345ull;
  cfg.max_people = 4;
  const nlohmann::json j = cfg;
  const SceneConfig back = j.get<SceneConfig>();
  EXPECT_EQ(back.seed, cfg.seed);
  EXPECT_EQ(back.max_people, 4);
}

TEST(CorruptMapsTest, IdentityClampAndDeterminism) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Tensor maps({1, 19, 10, 12});
  for (float& v : maps.data()) v = u(rng);
  EXPECT_EQ(corrupt_maps(maps, NoiseSpec{}, 5), maps);
  const NoiseSpec spec{0.3, 25, 0.9, true};
  const Tensor a = corrupt_maps(maps, spec, 5);
  EXPECT_EQ(corrupt_maps(maps, spec, 5), a);
  EXPECT_NE(corrupt_maps(maps, spec, 6), a);
  EXPECT_NE(a, maps);
  for (float v : a.data()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
  NoiseSpec signed_spec = spec;
  signed_spec.clamp_unit = false;
  const Tensor b = corrupt_maps(maps, signed_spec, 5);
  EXPECT_LT(*std::min_element(b.data().begin(), b.data().end()), 0.0f);
  EXPECT_THROW(corrupt_maps(maps, {-1.0, 0, 0.5, true}, 1), ConfigError);
}

TEST(OptimalAssignmentTest, Examples) {
  const Assignment diag = optimal_assignment({{1.0, 0.0}, {0.0, 1.0}});
  EXPECT_EQ(diag.pairs, (std::vector<std::pair<int, int>>{{0, 0}, {1, 1}}));
  EXPECT_DOUBLE_EQ(diag.total, 2.0);
  const Assignment single = optimal_assignment({{0.7}});
  EXPECT_EQ(single.pairs, (std::vector<std::pair<int, int>>{{0, 0}}));
  EXPECT_DOUBLE_EQ(single.total, 0.7);
  EXPECT_TRUE(optimal_assignment({}).pairs.empty());
}

TEST(OptimalAssignmentTest, BeatsEveryPermutation) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 6);
  for (int trial = 0; trial < 300; ++trial) {
    const int rows = trial < 100 ? 4 : dim(rng), cols = trial < 100 ? 4 : dim(rng);
    std::vector<std::vector<double>> m(rows, std::vector<double>(cols));
    for (auto& r : m)
      for (double& v : r) v = u(rng);
    const Assignment got = optimal_assignment(m);
    const auto want = oracle::brute_force_assignment(m);
    EXPECT_NEAR(got.total, want.total, 1e-12);
    EXPECT_EQ(static_cast<int>(got.pairs.size()), std::min(rows, cols));
    double total = 0.0;
    for (auto [r, c] : got.pairs) total += m[r][c];
    EXPECT_DOUBLE_EQ(total, got.total);
  }
}

TEST(OptimalAssignmentTest, SizeAndValueErrors) {
  const std::vector<std::vector<double>> big(11, std::vector<double>(3, 0.0));
  EXPECT_THROW(optimal_assignment(big), std::length_error);
  EXPECT_NO_THROW(optimal_assignment(std::vector<std::vector<double>>(10, std::vector<double>(10, 1.0))));
  EXPECT_THROW(optimal_assignment({{1.0, NAN}}), std::invalid_argument);
  EXPECT_THROW(optimal_assignment({{1.0, 2.0}, {1.0}}), std::invalid_argument);
}

TEST(ScenesToStoreTest, IdsAndAreas) {
  SceneConfig cfg;
  cfg.seed = 3;
  const auto a = sample_scene(cfg, def(), 2);
  cfg.seed = 4;
  const auto b = sample_scene(cfg, def(), 3);
  const GroundTruthStore s = scenes_to_store({a, b}, cfg.image);
  ASSERT_EQ(s.images.size(), 2u);
  EXPECT_EQ(s.images[1].id, 2);
  ASSERT_EQ(s.annotations.size(), 5u);
  EXPECT_EQ(s.annotations[4].id, 5);
  EXPECT_EQ(s.annotations[4].image_id, 2);
  EXPECT_DOUBLE_EQ(s.annotations[0].area, keypoint_box_area(a[0]));
}

}  // namespace
}  // namespace mlnpose
