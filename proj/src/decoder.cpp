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
#include "mlnpose/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mlnpose/errors.hpp"

namespace mlnpose {

void DecodeParams::validate() const {
  const auto unit = [](double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(what) + " must be in [0, 1]");
  };
  unit(nms_threshold, "nms_threshold");
  unit(sample_threshold, "sample_threshold");
  unit(min_valid_fraction, "min_valid_fraction");
  unit(min_mean_person_score, "min_mean_person_score");
  if (samples < 2) throw ConfigError("samples (D) must be >= 2");
  if (min_parts_per_person < 0) throw ConfigError("min_parts_per_person must be >= 0");
  if (output_stride < 1) throw ConfigError("output_stride must be >= 1");
}

void to_json(nlohmann::json& j, const DecodeParams& p) {
  j = {{"nms_threshold", p.nms_threshold},
       {"samples", p.samples},
       {"sample_threshold", p.sample_threshold},
       {"min_valid_fraction", p.min_valid_fraction},
       {"min_parts_per_person", p.min_parts_per_person},
       {"min_mean_person_score", p.min_mean_person_score},
       {"filters_enabled", p.filters_enabled},
       {"output_stride", p.output_stride}};
}

void from_json(const nlohmann::json& j, DecodeParams& p) {
  try {
    const DecodeParams d;
    p.nms_threshold = j.value("nms_threshold", d.nms_threshold);
    p.samples = j.value("samples", d.samples);
    p.sample_threshold = j.value("sample_threshold", d.sample_threshold);
    p.min_valid_fraction = j.value("min_valid_fraction", d.min_valid_fraction);
    p.min_parts_per_person = j.value("min_parts_per_person", d.min_parts_per_person);
    p.min_mean_person_score = j.value("min_mean_person_score", d.min_mean_person_score);
    p.filters_enabled = j.value("filters_enabled", d.filters_enabled);
    p.output_stride = j.value("output_stride", d.output_stride);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("decode", e.what());
  }
  p.validate();
}

namespace {

constexpr double kLogFloor = 1e-6;

// Vertex of the parabola through (-1, l), (0, c), (1, r) in log space; exact
// for Gaussian bumps. Returns 0 for flat or non-concave triples.
double refine_offset(double l, double c, double r) {
  const double ll = std::log(std::max(l, kLogFloor));
  const double lc = std::log(std::max(c, kLogFloor));
  const double lr = std::log(std::max(r, kLogFloor));
  const double curvature = ll - 2.0 * lc + lr;
  if (!(curvature < 0.0)) return 0.0;
  return std::clamp(0.5 * (ll - lr) / curvature, -0.5, 0.5);
}

double bilinear(const PlaneView& map, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(map.width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(map.height - 1));
  const int x0 = std::min(static_cast<int>(x), map.width - 1);
  const int y0 = std::min(static_cast<int>(y), map.height - 1);
  const int x1 = std::min(x0 + 1, map.width - 1);
  const int y1 = std::min(y0 + 1, map.height - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = map.at(y0, x0) * (1.0 - fx) + map.at(y0, x1) * fx;
  const double bottom = map.at(y1, x0) * (1.0 - fx) + map.at(y1, x1) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

bool higher_first(const ConnectionCandidate& a, const ConnectionCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.peak_a != b.peak_a) return a.peak_a < b.peak_a;
  return a.peak_b < b.peak_b;
}

}  // namespace

std::vector<PeakCandidate> nms_peaks(const PlaneView& map, const DecodeParams& params,
                                     int joint_type, int first_id) {
  std::vector<PeakCandidate> peaks;
  const double stride = params.output_stride;
  constexpr float kNone = -std::numeric_limits<float>::infinity();
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const float v = map.at(y, x);
      if (!(v >= params.nms_threshold)) continue;
      const float left = x > 0 ? map.at(y, x - 1) : kNone;
      const float right = x + 1 < map.width ? map.at(y, x + 1) : kNone;
      const float top = y > 0 ? map.at(y - 1, x) : kNone;
      const float bottom = y + 1 < map.height ? map.at(y + 1, x) : kNone;
      if (!(v > left && v > top && v >= right && v >= bottom)) continue;
      const double dx = (x > 0 && x + 1 < map.width) ? refine_offset(left, v, right) : 0.0;
      const double dy = (y > 0 && y + 1 < map.height) ? refine_offset(top, v, bottom) : 0.0;
      PeakCandidate p;
      p.joint_type = joint_type;
      p.x = (x + 0.5 + dx) * stride;
      p.y = (y + 0.5 + dy) * stride;
      p.score = v;
      p.id = first_id + static_cast<int>(peaks.size());
      peaks.push_back(p);
    }
  }
  return peaks;
}

ConnectionCandidate connection_score(const PeakCandidate& a, const PeakCandidate& b,
                                     const PlaneView& paf_x, const PlaneView& paf_y,
                                     const DecodeParams& params, int limb_type) {
  const double ex = b.x - a.x;
  const double ey = b.y - a.y;
  const double norm = std::hypot(ex, ey);
  if (norm == 0.0) {
    throw std::invalid_argument("connection_score: peaks " + std::to_string(a.id) + " and " +
                                std::to_string(b.id) + " coincide");
  }
  const double ux = ex / norm;
  const double uy = ey / norm;
  const double stride = params.output_stride;
  const int d_count = params.samples;
  double total = 0.0;
  int valid = 0;
  for (int d = 0; d < d_count; ++d) {
    const double t = (d + 0.5) / d_count;
    // Input pixels to map coordinates: cell c is centered at (c + 0.5) * stride.
    const double mx = (a.x + t * ex) / stride - 0.5;
    const double my = (a.y + t * ey) / stride - 0.5;
    const double dot = bilinear(paf_x, mx, my) * ux + bilinear(paf_y, mx, my) * uy;
    total += dot;
    if (dot > params.sample_threshold) ++valid;
  }
  ConnectionCandidate c;
  c.limb_type = limb_type;
  c.peak_a = a.id;
  c.peak_b = b.id;
  c.score = total / d_count;
  c.sample_count = d_count;
  c.valid_fraction = static_cast<double>(valid) / d_count;
  return c;
}

std::vector<ConnectionCandidate> score_limb(std::span<const PeakCandidate> cands_a,
                                            std::span<const PeakCandidate> cands_b,
                                            const PlaneView& paf_x, const PlaneView& paf_y,
                                            const DecodeParams& params, int limb_type) {
  std::vector<ConnectionCandidate> scored;
  scored.reserve(cands_a.size() * cands_b.size());
  for (const PeakCandidate& a : cands_a) {
    for (const PeakCandidate& b : cands_b) {
      if (a.x == b.x && a.y == b.y) {
        // Coincident peaks of two joint types carry no direction.
        ConnectionCandidate c;
        c.limb_type = limb_type;
        c.peak_a = a.id;
        c.peak_b = b.id;
        c.sample_count = params.samples;
        scored.push_back(c);
        continue;
      }
      scored.push_back(connection_score(a, b, paf_x, paf_y, params, limb_type));
    }
  }
  return scored;
}

std::vector<ConnectionCandidate> select_connections(std::vector<ConnectionCandidate> scored,
                                                    std::size_t count_a, std::size_t count_b,
                                                    const DecodeParams& params) {
  std::sort(scored.begin(), scored.end(), higher_first);
  const std::size_t limit = std::min(count_a, count_b);
  std::vector<ConnectionCandidate> accepted;
  std::vector<int> used_a, used_b;
  for (const ConnectionCandidate& c : scored) {
    if (accepted.size() >= limit) break;
    if (params.filters_enabled &&
        !(c.score > params.sample_threshold && c.valid_fraction >= params.min_valid_fraction)) {
      continue;
    }
    if (std::find(used_a.begin(), used_a.end(), c.peak_a) != used_a.end()) continue;
    if (std::find(used_b.begin(), used_b.end(), c.peak_b) != used_b.end()) continue;
    used_a.push_back(c.peak_a);
    used_b.push_back(c.peak_b);
    accepted.push_back(c);
  }
  return accepted;
}

std::vector<ConnectionCandidate> match_limb(std::span<const PeakCandidate> cands_a,
                                            std::span<const PeakCandidate> cands_b,
                                            const PlaneView& paf_x, const PlaneView& paf_y,
                                            const DecodeParams& params, int limb_type) {
  if (cands_a.empty() || cands_b.empty()) return {};
  return select_connections(score_limb(cands_a, cands_b, paf_x, paf_y, params, limb_type),
                            cands_a.size(), cands_b.size(), params);
}

int PersonAssembly::min_peak_id() const {
  int best = std::numeric_limits<int>::max();
  for (int id : peak_ids) {
    if (id >= 0) best = std::min(best, id);
  }
  return best;
}

std::vector<PersonAssembly> assemble(std::span<const std::vector<ConnectionCandidate>> connections,
                                     std::span<const PeakCandidate> peaks,
                                     const SkeletonDef& def, const DecodeParams& params) {
  const int m = def.num_joints();
  std::vector<PersonAssembly> persons;
  // person index owning each peak id, -1 when unassigned
  std::vector<int> owner(peaks.size(), -1);

  const auto limbs = std::min<std::size_t>(connections.size(), def.limbs.size());
  for (std::size_t l = 0; l < limbs; ++l) {
    const Limb limb = def.limbs[l];
    for (const ConnectionCandidate& c : connections[l]) {
      const int pa = owner.at(static_cast<std::size_t>(c.peak_a));
      const int pb = owner.at(static_cast<std::size_t>(c.peak_b));
      if (pa < 0 && pb < 0) {
        PersonAssembly p;
        p.peak_ids.assign(static_cast<std::size_t>(m), -1);
        p.peak_ids[limb.from] = c.peak_a;
        p.peak_ids[limb.to] = c.peak_b;
        owner[c.peak_a] = owner[c.peak_b] = static_cast<int>(persons.size());
        persons.push_back(std::move(p));
      } else if (pa >= 0 && pb < 0) {
        auto& slot = persons[pa].peak_ids[limb.to];
        if (slot < 0) {
          slot = c.peak_b;
          owner[c.peak_b] = pa;
        }
      } else if (pa < 0 && pb >= 0) {
        auto& slot = persons[pb].peak_ids[limb.from];
        if (slot < 0) {
          slot = c.peak_a;
          owner[c.peak_a] = pb;
        }
      } else if (pa != pb) {
        auto& keep = persons[pa].peak_ids;
        auto& gone = persons[pb].peak_ids;
        bool disjoint = true;
        for (int j = 0; j < m && disjoint; ++j) disjoint = keep[j] < 0 || gone[j] < 0;
        if (!disjoint) continue;
        for (int j = 0; j < m; ++j) {
          if (gone[j] < 0) continue;
          keep[j] = gone[j];
          owner[gone[j]] = pa;
          gone[j] = -1;
        }
      }
    }
  }

  std::vector<PersonAssembly> out;
  for (PersonAssembly& p : persons) {
    int parts = 0;
    double score_sum = 0.0;
    for (int id : p.peak_ids) {
      if (id < 0) continue;
      ++parts;
      score_sum += peaks[static_cast<std::size_t>(id)].score;
    }
    if (parts == 0) continue;  // merged away
    if (params.filters_enabled &&
        (parts < params.min_parts_per_person ||
         score_sum / parts < params.min_mean_person_score)) {
      continue;
    }
    out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(), [](const PersonAssembly& a, const PersonAssembly& b) {
    return a.min_peak_id() < b.min_peak_id();
  });
  return out;
}

Person to_person(const PersonAssembly& assembly, std::span<const PeakCandidate> peaks) {
  Person person(static_cast<int>(assembly.peak_ids.size()));
  for (std::size_t j = 0; j < assembly.peak_ids.size(); ++j) {
    const int id = assembly.peak_ids[j];
    if (id < 0) continue;
    const PeakCandidate& p = peaks[static_cast<std::size_t>(id)];
    person.keypoints[j] = Keypoint{p.x, p.y, Visibility::kVisible,
                                   std::clamp(static_cast<double>(p.score), 0.0, 1.0)};
  }
  return person;
}

std::vector<Person> assemble_skeletons(std::span<const std::vector<ConnectionCandidate>> connections,
                                       std::span<const PeakCandidate> peaks,
                                       const SkeletonDef& def, const DecodeParams& params) {
  std::vector<Person> out;
  for (const PersonAssembly& a : assemble(connections, peaks, def, params)) {
    out.push_back(to_person(a, peaks));
  }
  return out;
}

DecodeTrace decode_trace(const Tensor& joint_maps, const Tensor& limb_maps,
                         const SkeletonDef& def, const DecodeParams& params) {
  params.validate();
  const Shape& js = joint_maps.shape();
  const Shape& ls = limb_maps.shape();
  if (js.n != 1 || ls.n != 1) throw ShapeError("decode: expects batch size 1");
  if (js.c != def.joint_channels()) {
    throw ShapeError("decode: joint maps have " + std::to_string(js.c) +
                     " channels, skeleton needs " + std::to_string(def.joint_channels()));
  }
  if (ls.c != def.limb_channels()) {
    throw ShapeError("decode: limb maps have " + std::to_string(ls.c) +
                     " channels, skeleton needs " + std::to_string(def.limb_channels()));
  }
  if (js.h != ls.h || js.w != ls.w) {
    throw ShapeError("decode: joint maps " + js.str() + " and limb maps " + ls.str() +
                     " differ in size");
  }

  DecodeTrace t;
  t.peaks_by_joint.resize(static_cast<std::size_t>(def.num_joints()));
  for (int j = 0; j < def.num_joints(); ++j) {
    auto found = nms_peaks(joint_maps.view(0, j), params, j, static_cast<int>(t.peaks.size()));
    for (const PeakCandidate& p : found) t.peaks_by_joint[j].push_back(p.id);
    t.peaks.insert(t.peaks.end(), found.begin(), found.end());
  }

  t.connections.resize(static_cast<std::size_t>(def.num_limbs()));
  std::vector<PeakCandidate> cands_a, cands_b;
  for (int l = 0; l < def.num_limbs(); ++l) {
    const Limb limb = def.limbs[l];
    cands_a.clear();
    cands_b.clear();
    for (int id : t.peaks_by_joint[limb.from]) cands_a.push_back(t.peaks[id]);
    for (int id : t.peaks_by_joint[limb.to]) cands_b.push_back(t.peaks[id]);
    t.connections[l] = match_limb(cands_a, cands_b, limb_maps.view(0, 2 * l),
                                  limb_maps.view(0, 2 * l + 1), params, l);
  }

  t.assemblies = assemble(t.connections, t.peaks, def, params);
  for (const PersonAssembly& a : t.assemblies) t.persons.push_back(to_person(a, t.peaks));
  return t;
}

std::vector<Person> decode(const Tensor& joint_maps, const Tensor& limb_maps,
                           const SkeletonDef& def, const DecodeParams& params) {
  return decode_trace(joint_maps, limb_maps, def, params).persons;
}

}  // namespace mlnpose
