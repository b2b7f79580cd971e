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
#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <regex>
#include <stdexcept>

#include "mlnpose/byte_io.hpp"
#include "mlnpose/decoder.hpp"
#include "mlnpose/evalkit.hpp"
#include "mlnpose/groundtruth.hpp"
#include "mlnpose/network.hpp"
#include "mlnpose/parallel.hpp"
#include "mlnpose/synth.hpp"
#include "mlnpose/tensor_io.hpp"

namespace mlnpose::cli {
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

void require_file(const fs::path& path, const std::string& what) {
  if (!fs::is_regular_file(path)) {
    throw std::runtime_error(what + " not found: " + path.string());
  }
}

std::string read_text(const fs::path& path) {
  const std::vector<char> bytes = read_file(path.string());
  return std::string(bytes.begin(), bytes.end());
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file(path.string(), std::span<const char>(text.data(), text.size()));
}

nlohmann::json parse_json_file(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + " byte " + std::to_string(e.byte), e.what());
  }
}

std::string fmt(const char* pattern, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, value);
  return buf;
}

struct SceneMaps {
  Tensor joints;
  Tensor limbs;
};

SceneMaps render_scene(std::span<const Person> people, const PipelineConfig& cfg, ImageDims dims) {
  const MapDims md = map_dims_for(dims, cfg.groundtruth.output_stride);
  return {render_joint_stack(people, cfg.skeleton, cfg.groundtruth, md),
          render_paf_stack(people, cfg.skeleton, cfg.groundtruth, md)};
}

std::vector<std::vector<Person>> sample_scenes(const PipelineConfig& cfg, std::uint64_t seed,
                                               int n_scenes, int people, int threads) {
  std::vector<std::vector<Person>> scenes(static_cast<std::size_t>(n_scenes));
  parallel_for(scenes.size(), threads, [&](std::size_t i) {
    SceneConfig sc = cfg.scene;
    sc.seed = derive_seed(seed, i);
    scenes[i] = people > 0 ? sample_scene(sc, cfg.skeleton, people)
                           : sample_scene(sc, cfg.skeleton);
  });
  return scenes;
}

}  // namespace

PipelineConfig resolve_config(const RunConfig& run) {
  PipelineConfig cfg;
  if (!run.config_path.empty()) {
    require_file(run.config_path, "config file");
    cfg = load_config(run.config_path);
  }
  if (run.filters) cfg.decode.filters_enabled = *run.filters;
  if (run.threads < 1) throw ConfigError("--threads must be >= 1");
  return cfg;
}

void cmd_synth(const RunConfig& run, int n_scenes, int people, std::ostream& log) {
  if (n_scenes < 1) throw ConfigError("--scenes must be >= 1");
  if (run.out.empty()) throw ConfigError("synth needs --out");
  const PipelineConfig cfg = resolve_config(run);
  const auto scenes = sample_scenes(cfg, run.seed, n_scenes, people, run.threads);

  fs::create_directories(run.out / "maps");
  const GroundTruthStore store = scenes_to_store(scenes, cfg.scene.image);
  write_text(run.out / "annotations.json", write_annotations(store, cfg.skeleton).dump(1) + "\n");
  parallel_for(scenes.size(), run.threads, [&](std::size_t i) {
    const SceneMaps maps = render_scene(scenes[i], cfg, cfg.scene.image);
    const std::string id = std::to_string(i + 1);
    save_tensor((run.out / "maps" / (id + "_joints.mlnt")).string(), maps.joints);
    save_tensor((run.out / "maps" / (id + "_limbs.mlnt")).string(), maps.limbs);
  });
  log << "synth: " << scenes.size() << " scenes, " << store.annotations.size()
      << " people -> " << run.out.string() << "\n";
}

void cmd_render_gt(const RunConfig& run, const fs::path& annotations, std::ostream& log) {
  require_file(annotations, "annotation file");
  if (run.out.empty()) throw ConfigError("render-gt needs --out");
  const PipelineConfig cfg = resolve_config(run);
  const GroundTruthStore store = parse_annotations(read_text(annotations), cfg.skeleton);
  fs::create_directories(run.out);
  parallel_for(store.images.size(), run.threads, [&](std::size_t i) {
    const ImageInfo& info = store.images[i];
    std::vector<Person> people;
    for (const GtAnnotation* a : store.for_image(info.id)) {
      if (!a->iscrowd) people.push_back(a->person);
    }
    const SceneMaps maps = render_scene(people, cfg, {info.width, info.height});
    const std::string id = std::to_string(info.id);
    save_tensor((run.out / (id + "_joints.mlnt")).string(), maps.joints);
    save_tensor((run.out / (id + "_limbs.mlnt")).string(), maps.limbs);
  });
  log << "render-gt: " << store.images.size() << " images -> " << run.out.string() << "\n";
}

void cmd_forward(const RunConfig& run, const std::optional<fs::path>& weights,
                 const fs::path& image, std::ostream& log) {
  require_file(image, "image");
  if (weights) require_file(*weights, "weight file");
  if (run.out.empty()) throw ConfigError("forward needs --out");
  const PipelineConfig cfg = resolve_config(run);
  const NetworkGraph graph = build_mln(cfg.skeleton, cfg.network);
  const WeightStore store =
      weights ? load_weights(read_file(weights->string())) : random_weights(graph, run.seed);
  const Tensor input = image.extension() == ".ppm" ? load_ppm(image.string())
                                                   : load_tensor(image.string());

  const auto start = Clock::now();
  const ForwardResult result = forward(graph, store, input, run.threads);
  const double ms = elapsed_ms(start);

  fs::create_directories(run.out);
  save_tensor((run.out / "joints.mlnt").string(), result.joint_maps);
  save_tensor((run.out / "limbs.mlnt").string(), result.limb_maps);
  log << "forward: input " << input.shape().str() << " -> joints "
      << result.joint_maps.shape().str() << ", limbs " << result.limb_maps.shape().str()
      << " in " << fmt("%.1f", ms) << " ms (" << run.threads << " threads)\n";
}

std::vector<MapPair> find_map_pairs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("map directory not found: " + dir.string());
  static const std::regex name(R"((\d+)_joints\.mlnt)");
  std::vector<MapPair> pairs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string file = entry.path().filename().string();
    if (!std::regex_match(file, m, name)) continue;
    const fs::path limbs = dir / (m[1].str() + "_limbs.mlnt");
    require_file(limbs, "limb maps");
    pairs.push_back({std::stoi(m[1].str()), entry.path(), limbs});
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const MapPair& a, const MapPair& b) { return a.image_id < b.image_id; });
  return pairs;
}

void cmd_decode(const RunConfig& run, const std::vector<MapPair>& maps, std::ostream& log) {
  for (const MapPair& p : maps) {
    require_file(p.joints, "joint maps");
    require_file(p.limbs, "limb maps");
  }
  const PipelineConfig cfg = resolve_config(run);
  std::vector<std::vector<Detection>> per_image(maps.size());
  parallel_for(maps.size(), run.threads, [&](std::size_t i) {
    const Tensor joints = load_tensor(maps[i].joints.string());
    const Tensor limbs = load_tensor(maps[i].limbs.string());
    for (Person& p : decode(joints, limbs, cfg.skeleton, cfg.decode)) {
      per_image[i].push_back(make_detection(maps[i].image_id, std::move(p)));
    }
  });
  std::vector<Detection> dets;
  for (auto& d : per_image) std::move(d.begin(), d.end(), std::back_inserter(dets));
  const std::string text = write_results(dets).dump(1) + "\n";
  if (run.out.empty()) {
    log << text;
  } else {
    write_text(run.out, text);
    log << "decode: " << maps.size() << " images, " << dets.size() << " people -> "
        << run.out.string() << "\n";
  }
}

void cmd_eval(const RunConfig& run, const fs::path& results, const fs::path& annotations,
              std::ostream& log) {
  require_file(results, "results file");
  require_file(annotations, "annotation file");
  const PipelineConfig cfg = resolve_config(run);
  const GroundTruthStore store = parse_annotations(parse_json_file(annotations), cfg.skeleton);
  const std::vector<Detection> dets = parse_results(parse_json_file(results), cfg.skeleton);
  EvalParams params = EvalParams::coco(cfg.skeleton);
  if (!cfg.oks_constants.empty()) params.constants = cfg.oks_constants;
  const EvalResult r = average_precision(dets, store, params);
  log << format_metrics_table(r, results.stem().string());
  if (!run.out.empty()) write_text(run.out, to_json(r).dump(2) + "\n");
}

void cmd_complexity(const RunConfig& run, int height, int width, bool per_layer,
                    std::ostream& log) {
  const PipelineConfig cfg = resolve_config(run);
  const NetworkGraph graph = build_mln(cfg.skeleton, cfg.network);
  const ComplexityReport r =
      complexity_report(graph, {1, graph.input_channels, height, width});
  const bool mac2 = run.flop_convention == FlopConvention::kMac2;
  const auto first = mac2 ? FlopConvention::kMac2 : FlopConvention::kMac1;
  const auto second = mac2 ? FlopConvention::kMac1 : FlopConvention::kMac2;

  if (per_layer) {
    log << std::left << std::setw(34) << "layer" << std::setw(20) << "output" << std::right
        << std::setw(12) << "params" << std::setw(18) << "flops" << "\n";
    for (const LayerCost& c : r.layers) {
      if (c.params == 0 && c.flops_mac2 == 0) continue;
      log << std::left << std::setw(34) << c.name << std::setw(20) << c.output.str()
          << std::right << std::setw(12) << c.params << std::setw(18)
          << (mac2 ? c.flops_mac2 : c.flops_mac1) << "\n";
    }
    log << "\n";
  }
  log << "input " << r.input.str() << "\n";
  log << std::left << std::setw(16) << "Model Size" << std::setw(16) << "# Parameter"
      << std::setw(16) << "FLOPs" << "FLOPs\n";
  log << std::setw(16) << "" << std::setw(16) << "" << std::setw(16)
      << to_string(first) << to_string(second) << "\n";
  log << std::setw(16) << fmt("%.1f MB", r.model_size_mb()) << std::setw(16) << r.total_params
      << std::setw(16) << fmt("%.1fG", static_cast<double>(r.total_flops(first)) / 1e9)
      << fmt("%.1fG", static_cast<double>(r.total_flops(second)) / 1e9) << "\n"
      << std::right;
  if (!run.out.empty()) write_text(run.out, to_json(r, per_layer).dump(2) + "\n");
}

StageTimes time_decode(const Tensor& joint_maps, const Tensor& limb_maps, const SkeletonDef& def,
                       const DecodeParams& params) {
  StageTimes t;
  auto start = Clock::now();
  std::vector<PeakCandidate> peaks;
  std::vector<std::vector<int>> by_joint(static_cast<std::size_t>(def.num_joints()));
  for (int j = 0; j < def.num_joints(); ++j) {
    auto found = nms_peaks(joint_maps.view(0, j), params, j, static_cast<int>(peaks.size()));
    for (const PeakCandidate& p : found) by_joint[j].push_back(p.id);
    peaks.insert(peaks.end(), found.begin(), found.end());
  }
  t.nms_ms = elapsed_ms(start);

  start = Clock::now();
  std::vector<std::vector<ConnectionCandidate>> connections(
      static_cast<std::size_t>(def.num_limbs()));
  std::vector<PeakCandidate> a, b;
  for (int l = 0; l < def.num_limbs(); ++l) {
    a.clear();
    b.clear();
    for (int id : by_joint[def.limbs[l].from]) a.push_back(peaks[id]);
    for (int id : by_joint[def.limbs[l].to]) b.push_back(peaks[id]);
    connections[l] = match_limb(a, b, limb_maps.view(0, 2 * l), limb_maps.view(0, 2 * l + 1),
                                params, l);
  }
  t.scoring_ms = elapsed_ms(start);

  start = Clock::now();
  const auto persons = assemble_skeletons(connections, peaks, def, params);
  t.assembly_ms = elapsed_ms(start);
  if (persons.size() > peaks.size()) throw std::logic_error("more people than peaks");
  return t;
}

StageStats summarize(std::vector<double> samples_ms) {
  StageStats s;
  if (samples_ms.empty()) return s;
  std::sort(samples_ms.begin(), samples_ms.end());
  double sum = 0.0;
  for (double v : samples_ms) sum += v;
  s.mean_ms = sum / static_cast<double>(samples_ms.size());
  const auto rank = [&](double q) {
    const auto idx = static_cast<std::size_t>(q * static_cast<double>(samples_ms.size() - 1) + 0.5);
    return samples_ms[std::min(idx, samples_ms.size() - 1)];
  };
  s.p50_ms = rank(0.50);
  s.p99_ms = rank(0.99);
  return s;
}

BenchReport run_bench(const PipelineConfig& cfg, std::uint64_t seed, int scenes, int people,
                      int repetitions) {
  if (scenes < 1 || repetitions < 1) throw ConfigError("bench needs scenes and repetitions >= 1");
  const auto sampled = sample_scenes(cfg, seed, scenes, people, 1);
  std::vector<SceneMaps> maps;
  for (const auto& s : sampled) maps.push_back(render_scene(s, cfg, cfg.scene.image));

  std::vector<double> nms, scoring, assembly, grouping;
  for (int r = 0; r < repetitions; ++r) {
    for (const SceneMaps& m : maps) {
      const StageTimes t = time_decode(m.joints, m.limbs, cfg.skeleton, cfg.decode);
      nms.push_back(t.nms_ms);
      scoring.push_back(t.scoring_ms);
      assembly.push_back(t.assembly_ms);
      grouping.push_back(t.scoring_ms + t.assembly_ms);
    }
  }
  return {scenes,          people,          repetitions,          summarize(nms),
          summarize(scoring), summarize(assembly), summarize(grouping)};
}

void cmd_bench(const RunConfig& run, int scenes, int people, int repetitions, std::ostream& log) {
  const PipelineConfig cfg = resolve_config(run);
  const BenchReport r = run_bench(cfg, run.seed, scenes, people, repetitions);
  log << "bench: " << r.scenes << " scenes x " << r.repetitions << " repetitions, "
      << (people > 0 ? std::to_string(people) : std::string("random")) << " people per scene\n";
  log << std::left << std::setw(12) << "stage" << std::right << std::setw(12) << "mean ms"
      << std::setw(12) << "p50 ms" << std::setw(12) << "p99 ms" << "\n";
  const auto row = [&](const char* name, const StageStats& s) {
    log << std::left << std::setw(12) << name << std::right << std::setw(12)
        << fmt("%.4f", s.mean_ms) << std::setw(12) << fmt("%.4f", s.p50_ms) << std::setw(12)
        << fmt("%.4f", s.p99_ms) << "\n";
  };
  row("nms", r.nms);
  row("scoring", r.scoring);
  row("assembly", r.assembly);
  row("grouping", r.grouping);
  log << "reference grouping time: 0.2 ms for 2 people, 0.6 ms for 10 people\n";
  if (!run.out.empty()) {
    const auto stats = [](const StageStats& s) {
      return nlohmann::json{{"mean_ms", s.mean_ms}, {"p50_ms", s.p50_ms}, {"p99_ms", s.p99_ms}};
    };
    const nlohmann::json doc = {{"scenes", r.scenes},         {"people", r.people},
                                {"repetitions", r.repetitions}, {"nms", stats(r.nms)},
                                {"scoring", stats(r.scoring)},  {"assembly", stats(r.assembly)},
                                {"grouping", stats(r.grouping)}};
    write_text(run.out, doc.dump(2) + "\n");
  }
}

}  // namespace mlnpose::cli
