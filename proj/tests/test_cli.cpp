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
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "commands.hpp"
#include "mlnpose/byte_io.hpp"
#include "mlnpose/evalkit.hpp"
#include "mlnpose/network.hpp"
#include "mlnpose/tensor_io.hpp"

namespace mlnpose::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mlnpose_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
};

TEST_F(CliTest, SynthIsByteIdenticalForAFixedSeed) {
  RunConfig run;
  run.seed = 5;
  run.out = dir_ / "a";
  std::ostringstream log;
  cmd_synth(run, 4, 0, log);
  run.out = dir_ / "b";
  run.threads = 3;
  cmd_synth(run, 4, 0, log);
  for (const char* f : {"annotations.json", "maps/1_joints.mlnt", "maps/4_limbs.mlnt"}) {
    ASSERT_TRUE(fs::exists(dir_ / "a" / f)) << f;
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  EXPECT_EQ(find_map_pairs(dir_ / "a" / "maps").size(), 4u);
}

TEST_F(CliTest, RenderGtReproducesSynthMaps) {
  RunConfig run;
  run.out = dir_ / "s";
  std::ostringstream log;
  cmd_synth(run, 2, 3, log);
  run.out = dir_ / "r";
  cmd_render_gt(run, dir_ / "s" / "annotations.json", log);
  EXPECT_EQ(load_tensor((dir_ / "r" / "2_joints.mlnt").string()),
            load_tensor((dir_ / "s" / "maps" / "2_joints.mlnt").string()));
  EXPECT_EQ(load_tensor((dir_ / "r" / "1_limbs.mlnt").string()),
            load_tensor((dir_ / "s" / "maps" / "1_limbs.mlnt").string()));
}

TEST_F(CliTest, DecodeThenEvalOnIdealMapsIsPerfect) {
  RunConfig run;
  run.out = dir_ / "s";
  std::ostringstream log;
  cmd_synth(run, 5, 0, log);
  run.out = dir_ / "results.json";
  run.filters = false;
  cmd_decode(run, find_map_pairs(dir_ / "s" / "maps"), log);
  std::ostringstream table;
  run.out = dir_ / "metrics.json";
  cmd_eval(run, dir_ / "results.json", dir_ / "s" / "annotations.json", table);
  EXPECT_NE(table.str().find("1.000   1.000   1.000"), std::string::npos) << table.str();
  const auto metrics = nlohmann::json::parse(slurp(dir_ / "metrics.json"));
  EXPECT_EQ(metrics.at("AP").get<double>(), 1.0);
}

TEST_F(CliTest, GroundTruthAsDetectionsPrintsPerfectRow) {
  RunConfig run;
  run.out = dir_ / "s";
  std::ostringstream log;
  cmd_synth(run, 3, 0, log);
  const SkeletonDef def = default_skeleton();
  const GroundTruthStore gts = parse_annotations(slurp(dir_ / "s" / "annotations.json"), def);
  std::vector<Detection> dets;
  for (const auto& a : gts.annotations) dets.push_back(make_detection(a.image_id, a.person));
  std::ofstream(dir_ / "gt_results.json") << write_results(dets).dump();
  std::ostringstream table;
  run.out.clear();
  cmd_eval(run, dir_ / "gt_results.json", dir_ / "s" / "annotations.json", table);
  EXPECT_NE(table.str().find("gt_results       1.000   1.000   1.000"), std::string::npos)
      << table.str();
}

TEST_F(CliTest, DecodeOfZeroMapsIsAnEmptyArray) {
  save_tensor((dir_ / "7_joints.mlnt").string(), Tensor({1, 19, 46, 54}));
  save_tensor((dir_ / "7_limbs.mlnt").string(), Tensor({1, 38, 46, 54}));
  RunConfig run;
  std::ostringstream out;
  cmd_decode(run, find_map_pairs(dir_), out);
  EXPECT_EQ(nlohmann::json::parse(out.str()), nlohmann::json::array());
}

TEST_F(CliTest, ComplexityReportsBothConventions) {
  RunConfig run;
  run.out = dir_ / "c.json";
  std::ostringstream log;
  cmd_complexity(run, 368, 432, true, log);
  EXPECT_NE(log.str().find("20779826"), std::string::npos);
  EXPECT_NE(log.str().find("mac2"), std::string::npos);
  EXPECT_NE(log.str().find("mac1"), std::string::npos);
  EXPECT_NE(log.str().find("refine_limb_head"), std::string::npos);
  const auto j = nlohmann::json::parse(slurp(dir_ / "c.json"));
  EXPECT_EQ(j.at("total_params").get<std::int64_t>(), 20779826);
}

TEST_F(CliTest, ForwardWritesMapsFromPpm) {
  std::vector<std::uint8_t> rgb(3 * 40 * 32, 128);
  save_ppm((dir_ / "img.ppm").string(), 40, 32, rgb);
  RunConfig run;
  run.out = dir_ / "fwd";
  std::ostringstream log;
  cmd_forward(run, std::nullopt, dir_ / "img.ppm", log);
  EXPECT_EQ(load_tensor((dir_ / "fwd" / "joints.mlnt").string()).shape(), (Shape{1, 19, 4, 5}));
  EXPECT_EQ(load_tensor((dir_ / "fwd" / "limbs.mlnt").string()).shape(), (Shape{1, 38, 4, 5}));

  const NetworkGraph g = build_mln(default_skeleton());
  const auto bytes = save_weights(zero_weights(g));
  write_file((dir_ / "w.mlnw").string(), bytes);
  run.out = dir_ / "fwd0";
  cmd_forward(run, dir_ / "w.mlnw", dir_ / "img.ppm", log);
  EXPECT_EQ(load_tensor((dir_ / "fwd0" / "joints.mlnt").string()), Tensor({1, 19, 4, 5}));
}

TEST_F(CliTest, MissingInputsAreDiagnosed) {
  RunConfig run;
  run.out = dir_ / "x";
  std::ostringstream log;
  EXPECT_THROW(cmd_eval(run, dir_ / "none.json", dir_ / "none2.json", log), std::runtime_error);
  EXPECT_THROW(cmd_forward(run, std::nullopt, dir_ / "none.ppm", log), std::runtime_error);
  EXPECT_THROW(find_map_pairs(dir_ / "missing"), std::runtime_error);
  run.config_path = dir_ / "nope.json";
  EXPECT_THROW(cmd_complexity(run, 368, 432, false, log), std::runtime_error);
  std::ofstream(dir_ / "bad.json") << "{\"network\": [";
  run.config_path = dir_ / "bad.json";
  EXPECT_THROW(cmd_complexity(run, 368, 432, false, log), ParseError);
}

TEST_F(CliTest, BenchReportsStages) {
  const BenchReport r = run_bench(PipelineConfig{}, 1, 2, 10, 3);
  EXPECT_EQ(r.scenes, 2);
  EXPECT_GT(r.scoring.mean_ms, 0.0);
  EXPECT_LE(r.grouping.p50_ms, r.grouping.p99_ms);
  const StageStats s = summarize({3.0, 1.0, 2.0});
  EXPECT_DOUBLE_EQ(s.mean_ms, 2.0);
  EXPECT_DOUBLE_EQ(s.p50_ms, 2.0);
  EXPECT_DOUBLE_EQ(s.p99_ms, 3.0);
}

}  // namespace
}  // namespace mlnpose::cli
