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
#include <vector>

#include <gtest/gtest.h>

#include "mlnpose/errors.hpp"
#include "mlnpose/groundtruth.hpp"
#include "mlnpose/skeleton.hpp"

namespace mlnpose {
namespace {

Person person_with(int joint, double x, double y, Visibility v = Visibility::kVisible) {
  Person p(18);
  p.keypoints[static_cast<std::size_t>(joint)] = Keypoint{x, y, v, 1.0};
  return p;
}

TEST(JointMapTest, PeakAndFalloff) {
  GtConfig cfg;
  cfg.sigma = 8.0;
  const MapDims dims{10, 12};
  const std::vector<Person> people{person_with(0, 44.0, 36.0)};  // center of cell (4, 5)
  const Tensor m = render_joint_map(people, 0, cfg, dims);
  EXPECT_EQ(m.shape(), (Shape{1, 1, 10, 12}));
  EXPECT_FLOAT_EQ(m.at(0, 0, 4, 5), 1.0f);
  EXPECT_NEAR(m.at(0, 0, 4, 6), std::exp(-1.0), 1e-6);
  EXPECT_NEAR(m.at(0, 0, 3, 5), std::exp(-1.0), 1e-6);
  for (float v : m.data()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
  EXPECT_EQ(render_joint_map(people, 1, cfg, dims), Tensor({1, 1, 10, 12}));
}

TEST(JointMapTest, CoincidentPeopleUseMaxNotSum) {
  const GtConfig cfg;
  const MapDims dims{8, 8};
  const std::vector<Person> one{person_with(2, 30.0, 20.0)};
  const std::vector<Person> two{person_with(2, 30.0, 20.0), person_with(2, 30.0, 20.0)};
  EXPECT_EQ(render_joint_map(one, 2, cfg, dims), render_joint_map(two, 2, cfg, dims));
}

TEST(JointMapTest, OccludedKeypointsAreNotRendered) {
  const GtConfig cfg;
  const std::vector<Person> people{person_with(0, 20.0, 20.0, Visibility::kOccluded)};
  EXPECT_EQ(render_joint_map(people, 0, cfg, {6, 6}), Tensor({1, 1, 6, 6}));
}

TEST(JointMapTest, TranslationByWholeCellsShiftsTheMap) {
  const GtConfig cfg;
  const MapDims dims{20, 20};
  const Tensor a = render_joint_map(std::vector<Person>{person_with(0, 61.3, 70.9)}, 0, cfg, dims);
  const Tensor b =
      render_joint_map(std::vector<Person>{person_with(0, 61.3 + 16, 70.9 + 24)}, 0, cfg, dims);
  for (int y = 0; y + 3 < 20; ++y)
    for (int x = 0; x + 2 < 20; ++x) EXPECT_NEAR(b.at(0, 0, y + 3, x + 2), a.at(0, 0, y, x), 1e-6);
}

TEST(BackgroundTest, ComplementOfChannelMax) {
  const std::vector<Tensor> zero{Tensor({1, 1, 3, 4}), Tensor({1, 1, 3, 4})};
  EXPECT_EQ(render_background_map(zero), Tensor({1, 1, 3, 4}, 1.0f));

  const GtConfig cfg;
  const std::vector<Person> people{person_with(0, 20.0, 12.0), person_with(1, 36.0, 28.0)};
  const std::vector<Tensor> maps{render_joint_map(people, 0, cfg, {6, 7}),
                                 render_joint_map(people, 1, cfg, {6, 7})};
  const Tensor bg = render_background_map(maps);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 7; ++x) {
      const float mx = std::max(maps[0].at(0, 0, y, x), maps[1].at(0, 0, y, x));
      EXPECT_NEAR(bg.at(0, 0, y, x) + mx, 1.0f, 1e-7f);
    }
}

TEST(PafTest, HorizontalLimb) {
  SkeletonDef def{{"a", "b"}, {{0, 1}}, true};
  Person p(2);
  p.keypoints[0] = Keypoint{0.0, 40.0};
  p.keypoints[1] = Keypoint{80.0, 40.0};
  const GtConfig cfg;
  const Tensor paf = render_paf(std::vector<Person>{p}, def, 0, cfg, {12, 14});
  for (int x = 0; x < 10; ++x) {
    for (int y : {4, 5}) {
      EXPECT_EQ(paf.at(0, 0, y, x), 1.0f) << x << "," << y;
      EXPECT_EQ(paf.at(0, 1, y, x), 0.0f);
    }
    for (int y : {3, 6}) EXPECT_EQ(paf.at(0, 0, y, x), 0.0f);
  }
  EXPECT_EQ(paf.at(0, 0, 4, 10), 0.0f);
  EXPECT_EQ(paf.at(0, 0, 11, 13), 0.0f);
  EXPECT_THROW(render_paf(std::vector<Person>{p}, def, 1, cfg, {12, 14}), ConfigError);
}

TEST(PafTest, UnitNormAndAveraging) {
  const SkeletonDef def = default_skeleton();
  const GtConfig cfg;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> coord(0.0, 200.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Person> people(3, Person(18));
    for (Person& p : people) {
      p.keypoints[2] = Keypoint{coord(rng), coord(rng)};
      p.keypoints[3] = Keypoint{coord(rng), coord(rng)};
    }
    const Tensor one = render_paf(std::span(people).first(1), def, 2, cfg, {25, 25});
    const Tensor all = render_paf(people, def, 2, cfg, {25, 25});
    for (int y = 0; y < 25; ++y)
      for (int x = 0; x < 25; ++x) {
        const double n1 = std::hypot(one.at(0, 0, y, x), one.at(0, 1, y, x));
        if (n1 != 0.0) EXPECT_NEAR(n1, 1.0, 1e-6);
        EXPECT_LE(std::hypot(all.at(0, 0, y, x), all.at(0, 1, y, x)), 1.0 + 1e-6);
      }
  }
  // Two opposite limbs over the same cells average to zero.
  Person a(18), b(18);
  a.keypoints[2] = Keypoint{10.0, 20.0};
  a.keypoints[3] = Keypoint{60.0, 20.0};
  b.keypoints[2] = Keypoint{60.0, 20.0};
  b.keypoints[3] = Keypoint{10.0, 20.0};
  const Tensor both = render_paf(std::vector<Person>{a, b}, def, 2, cfg, {6, 10});
  EXPECT_EQ(both.at(0, 0, 2, 3), 0.0f);
}

TEST(PafTest, DegenerateLimbContributesNothing) {
  Person p(18);
  p.keypoints[2] = Keypoint{30.0, 30.0};
  p.keypoints[3] = Keypoint{30.0, 30.0};
  EXPECT_EQ(render_paf(std::vector<Person>{p}, default_skeleton(), 2, GtConfig{}, {8, 8}),
            Tensor({1, 2, 8, 8}));
}

TEST(StackTest, ChannelLayout) {
  const SkeletonDef def = default_skeleton();
  const GtConfig cfg;
  Person p(18);
  for (int j = 0; j < 18; ++j) p.keypoints[j] = Keypoint{20.0 + 5 * j, 30.0 + 3 * j};
  const std::vector<Person> people{p};
  const Tensor joints = render_joint_stack(people, def, cfg, {16, 20});
  const Tensor limbs = render_paf_stack(people, def, cfg, {16, 20});
  EXPECT_EQ(joints.shape(), (Shape{1, 19, 16, 20}));
  EXPECT_EQ(limbs.shape(), (Shape{1, 38, 16, 20}));
  const Tensor j7 = render_joint_map(people, 7, cfg, {16, 20});
  const Tensor l5 = render_paf(people, def, 5, cfg, {16, 20});
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 20; ++x) {
      EXPECT_EQ(joints.at(0, 7, y, x), j7.at(0, 0, y, x));
      EXPECT_EQ(limbs.at(0, 10, y, x), l5.at(0, 0, y, x));
      EXPECT_EQ(limbs.at(0, 11, y, x), l5.at(0, 1, y, x));
    }
}

TEST(MaskTest, ClearBoxUsesCellCenters) {
  MaskMap m = MaskMap::ones({4, 5});
  m.clear_box(8.0, 0.0, 16.0, 9.0, 8);  // covers centers x = 12, 20 and y = 4
  EXPECT_EQ(m.at(0, 1), 0);
  EXPECT_EQ(m.at(0, 2), 0);
  EXPECT_EQ(m.at(0, 0), 1);
  EXPECT_EQ(m.at(0, 3), 1);
  EXPECT_EQ(m.at(1, 1), 1);
}

TEST(LossTest, Examples) {
  const MaskMap ones = MaskMap::ones({3, 4});
  MaskMap zeros = ones;
  std::fill(zeros.values.begin(), zeros.values.end(), 0);
  std::mt19937 rng(1);
  std::uniform_real_distribution<float> d(0.0f, 1.0f);
  Tensor pred({1, 19, 3, 4}), gt({1, 19, 3, 4});
  for (float& v : pred.data()) v = d(rng);
  for (float& v : gt.data()) v = d(rng);
  EXPECT_EQ(joint_loss(gt, gt, ones), 0.0);
  EXPECT_EQ(joint_loss(pred, gt, zeros), 0.0);
  EXPECT_GT(joint_loss(pred, gt, ones), 0.0);

  Tensor one_cell = gt;
  one_cell.at(0, 5, 1, 2) += 0.5f;
  EXPECT_NEAR(joint_loss(one_cell, gt, ones), 0.25, 1e-7);

  Tensor unit({1, 38, 3, 4});
  unit.at(0, 0, 2, 3) = 1.0f;
  EXPECT_DOUBLE_EQ(limb_loss(Tensor({1, 38, 3, 4}), unit, ones), 1.0);
  Tensor twice = pred;
  for (std::size_t i = 0; i < twice.size(); ++i) {
    twice.data()[i] = gt.data()[i] + 2.0f * (pred.data()[i] - gt.data()[i]);
  }
  EXPECT_NEAR(joint_loss(twice, gt, ones), 4.0 * joint_loss(pred, gt, ones), 1e-5);

  EXPECT_THROW(joint_loss(pred, Tensor({1, 19, 3, 5}), ones), ShapeError);
  EXPECT_THROW(joint_loss(pred, gt, MaskMap::ones({3, 5})), ShapeError);
}

TEST(LossTest, GradientIsMaskedResidual) {
  MaskMap mask = MaskMap::ones({2, 3});
  mask.values[4] = 0;
  Tensor pred({1, 2, 2, 3}, 0.75f), gt({1, 2, 2, 3}, 0.25f);
  const Tensor g = loss_gradient(pred, gt, mask);
  EXPECT_EQ(g.at(0, 0, 0, 0), 1.0f);
  EXPECT_EQ(g.at(0, 1, 1, 1), 0.0f);  // cell 4 masked on every channel
  EXPECT_EQ(loss_gradient(gt, gt, mask), Tensor({1, 2, 2, 3}));
}

TEST(LossTest, GradientMatchesCentralDifferences) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<float> d(-1.0f, 1.0f);
  Tensor pred({1, 3, 4, 5}), gt({1, 3, 4, 5});
  for (float& v : pred.data()) v = d(rng);
  for (float& v : gt.data()) v = d(rng);
  MaskMap mask = MaskMap::ones({4, 5});
  for (auto& v : mask.values) v = rng() % 4 != 0;
  const Tensor grad = loss_gradient(pred, gt, mask);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    Tensor plus = pred, minus = pred;
    plus.data()[i] = static_cast<float>(pred.data()[i] + 1e-3);
    minus.data()[i] = static_cast<float>(pred.data()[i] - 1e-3);
    const double step = static_cast<double>(plus.data()[i]) - minus.data()[i];
    const double fd = (joint_loss(plus, gt, mask) - joint_loss(minus, gt, mask)) / step;
    EXPECT_NEAR(fd, grad.data()[i], 1e-6 + 1e-4 * std::abs(fd));
  }
}

}  // namespace
}  // namespace mlnpose
