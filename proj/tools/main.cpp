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
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

namespace cli = mlnpose::cli;
namespace fs = std::filesystem;

int run(int argc, char** argv) {
  CLI::App app{"mlnpose: multi-person pose estimation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  cli::RunConfig rc;
  std::string config_path, out, filters, flops = "mac2";
  app.add_option("--config", config_path, "JSON config document")->check(CLI::ExistingFile);
  app.add_option("--seed", rc.seed, "RNG seed");
  app.add_option("--threads", rc.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--filters", filters, "person filters during decode")
      ->check(CLI::IsMember({"on", "off"}));
  app.add_option("--flop-convention", flops, "FLOPs per multiply-accumulate")
      ->check(CLI::IsMember({"mac1", "mac2"}));
  app.add_option("--out", out, "output file or directory");

  int scenes = 10, people = 0;
  auto* synth = app.add_subcommand("synth", "sample scenes, write annotations and ideal maps");
  synth->add_option("--scenes", scenes, "scene count")->check(CLI::PositiveNumber);
  synth->add_option("--people", people, "people per scene (0: config range)")
      ->check(CLI::NonNegativeNumber);

  std::string annotations;
  auto* render = app.add_subcommand("render-gt", "render ideal maps for an annotation file");
  render->add_option("--annotations", annotations)->required()->check(CLI::ExistingFile);

  std::string weights, image;
  auto* fwd = app.add_subcommand("forward", "run the network on one image");
  fwd->add_option("--weights", weights, "MLNW weights (default: random from --seed)")
      ->check(CLI::ExistingFile);
  fwd->add_option("--image", image, "PPM (P6) or MLNT image")->required()->check(CLI::ExistingFile);

  std::string joints, limbs, maps_dir;
  int image_id = 1;
  auto* dec = app.add_subcommand("decode", "decode map tensors into COCO results");
  auto* joints_opt = dec->add_option("--joints", joints, "joint maps (MLNT)");
  auto* limbs_opt = dec->add_option("--limbs", limbs, "limb maps (MLNT)");
  dec->add_option("--image-id", image_id, "image id for a single map pair");
  auto* maps_opt = dec->add_option("--maps", maps_dir, "directory of <id>_joints/_limbs.mlnt");
  joints_opt->needs(limbs_opt);
  limbs_opt->needs(joints_opt);
  maps_opt->excludes(joints_opt)->excludes(limbs_opt);

  std::string results;
  auto* eval = app.add_subcommand("eval", "keypoint AP of results against annotations");
  eval->add_option("--results", results)->required();
  eval->add_option("--annotations", annotations)->required();

  int height = 368, width = 432;
  bool per_layer = false;
  auto* cx = app.add_subcommand("complexity", "parameter count, model size and FLOPs");
  cx->add_option("--height", height)->check(CLI::PositiveNumber);
  cx->add_option("--width", width)->check(CLI::PositiveNumber);
  cx->add_flag("--per-layer", per_layer);

  int bench_scenes = 20, bench_people = 10, repetitions = 50;
  auto* bench = app.add_subcommand("bench", "decoder stage latency on synthetic scenes");
  bench->add_option("--scenes", bench_scenes)->check(CLI::PositiveNumber);
  bench->add_option("--people", bench_people)->check(CLI::NonNegativeNumber);
  bench->add_option("--repetitions", repetitions)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  rc.config_path = config_path;
  rc.out = out;
  if (!filters.empty()) rc.filters = filters == "on";
  rc.flop_convention =
      flops == "mac1" ? mlnpose::FlopConvention::kMac1 : mlnpose::FlopConvention::kMac2;

  auto& log = std::cout;
  if (*synth) {
    cli::cmd_synth(rc, scenes, people, log);
  } else if (*render) {
    cli::cmd_render_gt(rc, annotations, log);
  } else if (*fwd) {
    cli::cmd_forward(rc, weights.empty() ? std::nullopt : std::optional<fs::path>(weights),
                     image, log);
  } else if (*dec) {
    std::vector<cli::MapPair> pairs;
    if (!maps_dir.empty()) {
      pairs = cli::find_map_pairs(maps_dir);
    } else if (!joints.empty()) {
      pairs.push_back({image_id, joints, limbs});
    } else {
      throw std::runtime_error("decode needs --maps or --joints/--limbs");
    }
    cli::cmd_decode(rc, pairs, log);
  } else if (*eval) {
    cli::cmd_eval(rc, results, annotations, log);
  } else if (*cx) {
    cli::cmd_complexity(rc, height, width, per_layer, log);
  } else if (*bench) {
    cli::cmd_bench(rc, bench_scenes, bench_people, repetitions, log);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "mlnpose: error: " << e.what() << "\n";
    return 1;
  }
}
