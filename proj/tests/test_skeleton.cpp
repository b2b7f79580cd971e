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
#include <set>

#include <gtest/gtest.h>

#include "mlnpose/config.hpp"
#include "mlnpose/errors.hpp"
#include "mlnpose/skeleton.hpp"

namespace mlnpose {
namespace {

TEST(SkeletonTest, DefaultLayout) {
  const SkeletonDef def = default_skeleton();
  EXPECT_EQ(def.num_joints(), 18);
  EXPECT_EQ(def.num_limbs(), 19);
  EXPECT_EQ(def.joint_channels(), 19);
  EXPECT_EQ(def.limb_channels(), 38);
  EXPECT_NO_THROW(def.validate());
  std::set<int> touched;
  for (const Limb& l : def.limbs) {
    touched.insert(l.from);
    touched.insert(l.to);
  }
  EXPECT_EQ(touched.size(), 18u);
  EXPECT_EQ(def.joint_index("neck"), 1);
  EXPECT_EQ(def.joint_index("tail"), -1);
}

TEST(SkeletonTest, ValidateRejectsBrokenGraphs) {
  SkeletonDef def = default_skeleton();
  def.limbs.push_back({0, 18});
  EXPECT_THROW(def.validate(), ConfigError);
  def = default_skeleton();
  def.limbs.push_back(def.limbs.front());
  EXPECT_THROW(def.validate(), ConfigError);
  def = default_skeleton();
  def.limbs.push_back({3, 3});
  EXPECT_THROW(def.validate(), ConfigError);
  def = SkeletonDef{{"a", "b", "c", "d"}, {{0, 1}, {2, 3}}, true};
  EXPECT_THROW(def.validate(), ConfigError);
}

TEST(SkeletonTest, JsonRoundTripIsExact) {
  const SkeletonDef def = default_skeleton();
  const nlohmann::json j = def;
  EXPECT_EQ(j.get<SkeletonDef>(), def);
  const SkeletonDef small{{"a", "b", "c"}, {{0, 1}, {1, 2}}, false};
  const std::string text = nlohmann::json(small).dump();
  EXPECT_EQ(nlohmann::json::parse(text).get<SkeletonDef>(), small);
}

TEST(ValidatePersonTest, ReportsViolations) {
  const SkeletonDef def = default_skeleton();
  const ImageDims dims{100, 80};
  EXPECT_TRUE(validate_person(Person(18), def, dims).empty());
  EXPECT_TRUE(validate_person(Person(), def, dims).empty());

  Person p(18);
  p.keypoints[3] = Keypoint{-1.0, 5.0};
  auto v = validate_person(p, def, dims);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::kOutOfBounds);
  EXPECT_EQ(v[0].joint, 3);

  p = Person(18);
  p.keypoints[0] = Keypoint{10.0, 10.0, Visibility::kVisible, 1.5};
  v = validate_person(p, def, dims);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::kConfidenceRange);

  p = Person(18);
  p.keypoints[0] = Keypoint{100.0, 80.0};
  EXPECT_TRUE(validate_person(p, def, dims).empty());
  EXPECT_EQ(validate_person(Person(17), def, dims).front().kind, Violation::Kind::kJointCount);
}

TEST(ConfigTest, RoundTripsEverySection) {
  PipelineConfig cfg;
  cfg.network.aggregation = Aggregation::kConcat;
  cfg.groundtruth.sigma = 5.5;
  cfg.decode.filters_enabled = false;
  cfg.scene.min_spacing = 33.0;
  cfg.oks_constants.assign(18, 0.07);
  const std::string text = nlohmann::json(cfg).dump();
  const PipelineConfig back = parse_config(text);
  EXPECT_EQ(back.skeleton, cfg.skeleton);
  EXPECT_EQ(back.network, cfg.network);
  EXPECT_EQ(back.groundtruth.sigma, 5.5);
  EXPECT_FALSE(back.decode.filters_enabled);
  EXPECT_EQ(back.scene.min_spacing, 33.0);
  EXPECT_EQ(back.oks_constants, cfg.oks_constants);
  EXPECT_EQ(nlohmann::json(back).dump(), text);
}

TEST(ConfigTest, EmptyDocumentGivesDefaults) {
  const PipelineConfig cfg = parse_config("{}");
  EXPECT_EQ(cfg.skeleton, default_skeleton());
  EXPECT_EQ(cfg.network, NetworkConfig{});
}

TEST(ConfigTest, RejectsInconsistentDocuments) {
  EXPECT_THROW(parse_config("{\"decode\": {\"output_stride\": 4}}"), ConfigError);
  EXPECT_THROW(parse_config("{\"oks_constants\": [0.1, 0.2]}"), ConfigError);
  EXPECT_THROW(parse_config("{\"groundtruth\": {\"sigma\": -1}}"), ConfigError);
  EXPECT_THROW(parse_config("{\"scene\": {\"width\": \"wide\"}}"), ParseError);
  try {
    parse_config("{\"network\": ");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(e.where().find("byte"), std::string::npos);
  }
}

}  // namespace
}  // namespace mlnpose
