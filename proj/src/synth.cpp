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

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>

#include "mlnpose/errors.hpp"

namespace mlnpose {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t state = master;
  std::uint64_t out = splitmix64(state);
  for (std::uint64_t i = 0; i < index % 8; ++i) out = splitmix64(state);
  state ^= index * 0xd1b54a32d192ed03ull;
  return out ^ splitmix64(state);
}

SceneRng::SceneRng(std::uint64_t seed) {
  std::uint64_t state = seed;
  engine_.seed(splitmix64(state));
}

double SceneRng::uniform() {
  return static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740992.0);
}

double SceneRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int SceneRng::uniform_int(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(engine_() % span);
}

double SceneRng::normal() {
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void SceneConfig::validate() const {
  if (image.width <= 0 || image.height <= 0) throw ConfigError("scene image dims must be positive");
  if (min_people < 0 || max_people < min_people) {
    throw ConfigError("scene person count range is invalid");
  }
  if (!(min_limb_length > 0.0) || max_limb_length < min_limb_length) {
    throw ConfigError("scene limb length range is invalid");
  }
  if (!(min_spacing >= 0.0)) throw ConfigError("scene spacing must be >= 0");
  if (max_attempts < 1) throw ConfigError("scene max_attempts must be >= 1");
}

void to_json(nlohmann::json& j, const SceneConfig& c) {
  j = {{"width", c.image.width},
       {"height", c.image.height},
       {"min_people", c.min_people},
       {"max_people", c.max_people},
       {"min_limb_length", c.min_limb_length},
       {"max_limb_length", c.max_limb_length},
       {"min_spacing", c.min_spacing},
       {"angle_jitter_deg", c.angle_jitter_deg},
       {"seed", c.seed},
       {"max_attempts", c.max_attempts}};
}

void from_json(const nlohmann::json& j, SceneConfig& c) {
  try {
    const SceneConfig d;
    c.image.width = j.value("width", d.image.width);
    c.image.height = j.value("height", d.image.height);
    c.min_people = j.value("min_people", d.min_people);
    c.max_people = j.value("max_people", d.max_people);
    c.min_limb_length = j.value("min_limb_length", d.min_limb_length);
    c.max_limb_length = j.value("max_limb_length", d.max_limb_length);
    c.min_spacing = j.value("min_spacing", d.min_spacing);
    c.angle_jitter_deg = j.value("angle_jitter_deg", d.angle_jitter_deg);
    c.seed = j.value("seed", d.seed);
    c.max_attempts = j.value("max_attempts", d.max_attempts);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("scene", e.what());
  }
  c.validate();
}

namespace {

// Canonical parent->child direction in image coordinates (degrees, y down),
// keyed by the child joint. The subject faces the camera, so its right side
// is on the image left.
const std::map<std::string, double>& canonical_angles() {
  static const std::map<std::string, double> table = {
      {"nose", -90.0},     {"r_eye", -150.0},     {"l_eye", -30.0},
      {"r_ear", 150.0},    {"l_ear", 30.0},       {"r_shoulder", 180.0},
      {"l_shoulder", 0.0}, {"r_elbow", 100.0},    {"l_elbow", 80.0},
      {"r_wrist", 90.0},   {"l_wrist", 90.0},     {"r_hip", 105.0},
      {"l_hip", 75.0},     {"r_knee", 90.0},      {"l_knee", 90.0},
      {"r_ankle", 90.0},   {"l_ankle", 90.0}};
  return table;
}

struct TreeEdge {
  int parent;
  int child;
};

// Spanning tree over the limb graph, grown in chain order from the neck (or
// joint 0 when there is no neck).
std::pair<int, std::vector<TreeEdge>> spanning_tree(const SkeletonDef& def) {
  const int neck = def.joint_index("neck");
  int root = neck >= 0 ? neck : def.limbs.empty() ? 0 : def.limbs.front().from;
  std::vector<bool> placed(static_cast<std::size_t>(def.num_joints()), false);
  placed[root] = true;
  std::vector<TreeEdge> edges;
  for (bool grew = true; grew;) {
    grew = false;
    for (const Limb& l : def.limbs) {
      if (placed[l.from] && !placed[l.to]) {
        edges.push_back({l.from, l.to});
        placed[l.to] = grew = true;
      } else if (placed[l.to] && !placed[l.from]) {
        edges.push_back({l.to, l.from});
        placed[l.from] = grew = true;
      }
    }
  }
  return {root, edges};
}

double point_segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double ex = bx - ax, ey = by - ay;
  const double len2 = ex * ex + ey * ey;
  double t = len2 > 0.0 ? ((px - ax) * ex + (py - ay) * ey) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (ax + t * ex), py - (ay + t * ey));
}

double cross(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

bool segments_intersect(const Keypoint& a, const Keypoint& b, const Keypoint& c, const Keypoint& d) {
  const double d1 = cross(b.x - a.x, b.y - a.y, c.x - a.x, c.y - a.y);
  const double d2 = cross(b.x - a.x, b.y - a.y, d.x - a.x, d.y - a.y);
  const double d3 = cross(d.x - c.x, d.y - c.y, a.x - c.x, a.y - c.y);
  const double d4 = cross(d.x - c.x, d.y - c.y, b.x - c.x, b.y - c.y);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

double segment_distance(const Keypoint& a, const Keypoint& b, const Keypoint& c, const Keypoint& d) {
  if (segments_intersect(a, b, c, d)) return 0.0;
  return std::min({point_segment_distance(a.x, a.y, c.x, c.y, d.x, d.y),
                   point_segment_distance(b.x, b.y, c.x, c.y, d.x, d.y),
                   point_segment_distance(c.x, c.y, a.x, a.y, b.x, b.y),
                   point_segment_distance(d.x, d.y, a.x, a.y, b.x, b.y)});
}

bool limb_lengths_ok(const Person& p, const SkeletonDef& def, const SceneConfig& cfg) {
  for (const Limb& l : def.limbs) {
    const auto& a = p.keypoints[l.from];
    const auto& b = p.keypoints[l.to];
    if (!a || !b) continue;
    const double len = std::hypot(b->x - a->x, b->y - a->y);
    if (len < cfg.min_limb_length || len > cfg.max_limb_length) return false;
  }
  return true;
}

// Bodies face the camera: the right shoulder and hip lie left of the left ones.
bool facing_camera(const Person& p, const SkeletonDef& def) {
  for (const char* part : {"shoulder", "hip"}) {
    const int r = def.joint_index(std::string("r_") + part);
    const int l = def.joint_index(std::string("l_") + part);
    if (r < 0 || l < 0 || !p.keypoints[r] || !p.keypoints[l]) continue;
    if (!(p.keypoints[r]->x < p.keypoints[l]->x)) return false;
  }
  return true;
}

// A body at the origin with all limb lengths in range.
Person sample_body(SceneRng& rng, const SkeletonDef& def, const SceneConfig& cfg, int root,
                   const std::vector<TreeEdge>& tree) {
  constexpr int kBodyTries = 10000;
  const double jitter = cfg.angle_jitter_deg;
  for (int attempt = 0; attempt < kBodyTries; ++attempt) {
    Person p(def.num_joints());
    p.keypoints[root] = Keypoint{0.0, 0.0, Visibility::kVisible, 1.0};
    for (const TreeEdge& e : tree) {
      const auto it = canonical_angles().find(def.joint_names[e.child]);
      const double deg = it == canonical_angles().end()
                             ? rng.uniform(-180.0, 180.0)
                             : it->second + rng.uniform(-jitter, jitter);
      const double rad = deg * std::numbers::pi / 180.0;
      const double len = rng.uniform(cfg.min_limb_length, cfg.max_limb_length);
      const Keypoint& from = *p.keypoints[e.parent];
      p.keypoints[e.child] = Keypoint{from.x + len * std::cos(rad), from.y + len * std::sin(rad),
                                      Visibility::kVisible, 1.0};
    }
    if (limb_lengths_ok(p, def, cfg) && facing_camera(p, def)) return p;
  }
  throw InfeasibleSceneError("cannot sample a body whose limbs all fit the length range");
}

bool try_place(SceneRng& rng, Person body, const SceneConfig& cfg, const SkeletonDef& def,
               std::vector<Person>& placed) {
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
  for (const auto& k : body.keypoints) {
    if (!k) continue;
    x0 = std::min(x0, k->x);
    x1 = std::max(x1, k->x);
    y0 = std::min(y0, k->y);
    y1 = std::max(y1, k->y);
  }
  if (x1 - x0 > cfg.image.width || y1 - y0 > cfg.image.height) return false;
  const double tx = rng.uniform(-x0, cfg.image.width - x1);
  const double ty = rng.uniform(-y0, cfg.image.height - y1);
  for (auto& k : body.keypoints) {
    if (!k) continue;
    k->x = std::clamp(k->x + tx, 0.0, static_cast<double>(cfg.image.width));
    k->y = std::clamp(k->y + ty, 0.0, static_cast<double>(cfg.image.height));
  }
  const auto [cx, cy] = person_center(body);
  for (const Person& other : placed) {
    const auto [ox, oy] = person_center(other);
    if (std::hypot(cx - ox, cy - oy) < cfg.min_spacing) return false;
    if (min_limb_distance(body, other, def) < cfg.min_spacing) return false;
  }
  placed.push_back(std::move(body));
  return true;
}

}  // namespace

std::pair<double, double> person_center(const Person& p) {
  double sx = 0.0, sy = 0.0;
  int n = 0;
  for (const auto& k : p.keypoints) {
    if (!k) continue;
    sx += k->x;
    sy += k->y;
    ++n;
  }
  return n ? std::pair{sx / n, sy / n} : std::pair{0.0, 0.0};
}

double min_limb_distance(const Person& a, const Person& b, const SkeletonDef& def) {
  double best = std::numeric_limits<double>::infinity();
  for (const Limb& la : def.limbs) {
    const auto& a0 = a.keypoints[la.from];
    const auto& a1 = a.keypoints[la.to];
    if (!a0 || !a1) continue;
    for (const Limb& lb : def.limbs) {
      const auto& b0 = b.keypoints[lb.from];
      const auto& b1 = b.keypoints[lb.to];
      if (!b0 || !b1) continue;
      best = std::min(best, segment_distance(*a0, *a1, *b0, *b1));
    }
  }
  return best;
}

std::vector<Person> sample_scene(const SceneConfig& cfg, const SkeletonDef& def) {
  cfg.validate();
  SceneRng rng(cfg.seed);
  const int count = rng.uniform_int(cfg.min_people, cfg.max_people);
  SceneConfig rest = cfg;
  rest.seed = derive_seed(cfg.seed, 0x5ce9e);
  return sample_scene(rest, def, count);
}

std::vector<Person> sample_scene(const SceneConfig& cfg, const SkeletonDef& def, int count) {
  cfg.validate();
  def.validate();
  constexpr int kRestarts = 50;
  SceneRng rng(cfg.seed);
  const auto [root, tree] = spanning_tree(def);
  for (int restart = 0; restart < kRestarts; ++restart) {
    std::vector<Person> placed;
    bool ok = true;
    for (int i = 0; i < count && ok; ++i) {
      ok = false;
      for (int attempt = 0; attempt < cfg.max_attempts && !ok; ++attempt) {
        ok = try_place(rng, sample_body(rng, def, cfg, root, tree), cfg, def, placed);
      }
    }
    if (ok) return placed;
  }
  throw InfeasibleSceneError("cannot place " + std::to_string(count) + " people with spacing " +
                             std::to_string(cfg.min_spacing) + " px in a " +
                             std::to_string(cfg.image.width) + "x" +
                             std::to_string(cfg.image.height) + " image");
}

Tensor corrupt_maps(const Tensor& maps, const NoiseSpec& spec, std::uint64_t seed) {
  if (!(spec.sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
  Tensor out = maps;
  SceneRng rng(seed);
  const Shape& s = maps.shape();
  if (spec.sigma > 0.0) {
    for (float& v : out.data()) v += static_cast<float>(spec.sigma * rng.normal());
  }
  if (s.numel() > 0) {
    for (int i = 0; i < spec.false_peaks; ++i) {
      const int n = rng.uniform_int(0, s.n - 1);
      const int c = rng.uniform_int(0, s.c - 1);
      const int py = rng.uniform_int(0, s.h - 1);
      const int px = rng.uniform_int(0, s.w - 1);
      for (int y = std::max(0, py - 3); y <= std::min(s.h - 1, py + 3); ++y) {
        for (int x = std::max(0, px - 3); x <= std::min(s.w - 1, px + 3); ++x) {
          const double d2 = (x - px) * (x - px) + (y - py) * (y - py);
          float& cell = out.at(n, c, y, x);
          cell = std::max(cell, static_cast<float>(spec.false_peak_amplitude * std::exp(-d2)));
        }
      }
    }
  }
  if (spec.clamp_unit) {
    for (float& v : out.data()) v = std::clamp(v, 0.0f, 1.0f);
  }
  return out;
}

namespace {

struct AssignmentSearch {
  const std::vector<std::vector<double>>& m;  // rows <= cols
  std::vector<double> row_best_suffix;        // bound: sum of row maxima from r on
  std::vector<int> current;
  std::vector<char> used;
  std::vector<int> best;
  double best_total = -std::numeric_limits<double>::infinity();

  void run(std::size_t r, double total) {
    if (r == m.size()) {
      if (total > best_total) {
        best_total = total;
        best = current;
      }
      return;
    }
    if (total + row_best_suffix[r] <= best_total) return;
    for (std::size_t c = 0; c < m[r].size(); ++c) {
      if (used[c]) continue;
      used[c] = 1;
      current[r] = static_cast<int>(c);
      run(r + 1, total + m[r][c]);
      used[c] = 0;
    }
  }
};

}  // namespace

Assignment optimal_assignment(const std::vector<std::vector<double>>& scores) {
  const std::size_t rows = scores.size();
  const std::size_t cols = rows ? scores.front().size() : 0;
  for (const auto& row : scores) {
    if (row.size() != cols) throw std::invalid_argument("optimal_assignment: ragged matrix");
    for (double v : row) {
      if (!std::isfinite(v)) throw std::invalid_argument("optimal_assignment: non-finite score");
    }
  }
  if (rows > kMaxAssignmentSize || cols > kMaxAssignmentSize) {
    throw std::length_error("optimal_assignment: matrix " + std::to_string(rows) + "x" +
                            std::to_string(cols) + " exceeds " +
                            std::to_string(kMaxAssignmentSize) + "x" +
                            std::to_string(kMaxAssignmentSize));
  }
  Assignment out;
  if (rows == 0 || cols == 0) return out;

  const bool transposed = rows > cols;
  std::vector<std::vector<double>> m = scores;
  if (transposed) {
    m.assign(cols, std::vector<double>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) m[c][r] = scores[r][c];
    }
  }
  AssignmentSearch search{m, std::vector<double>(m.size() + 1, 0.0),
                          std::vector<int>(m.size(), -1), std::vector<char>(m.front().size(), 0),
                          {}};
  for (std::size_t r = m.size(); r-- > 0;) {
    search.row_best_suffix[r] =
        search.row_best_suffix[r + 1] + *std::max_element(m[r].begin(), m[r].end());
  }
  search.run(0, 0.0);

  for (std::size_t r = 0; r < search.best.size(); ++r) {
    const int c = search.best[r];
    out.pairs.emplace_back(transposed ? c : static_cast<int>(r),
                           transposed ? static_cast<int>(r) : c);
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  for (const auto& [r, c] : out.pairs) out.total += scores[r][c];
  return out;
}

GroundTruthStore scenes_to_store(const std::vector<std::vector<Person>>& scenes, ImageDims dims) {
  GroundTruthStore store;
  int ann_id = 1;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const int image_id = static_cast<int>(i) + 1;
    store.images.push_back({image_id, dims.width, dims.height,
                            "synthetic_" + std::to_string(image_id)});
    for (const Person& p : scenes[i]) {
      GtAnnotation a;
      a.id = ann_id++;
      a.image_id = image_id;
      a.person = p;
      a.area = keypoint_box_area(p);
      store.annotations.push_back(std::move(a));
    }
  }
  return store;
}

}  // namespace mlnpose
