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
#include "mlnpose/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mlnpose/errors.hpp"

namespace mlnpose {

namespace {

// COCO per-keypoint sigmas; k = 2 * sigma.
const std::map<std::string, double>& coco_sigmas() {
  static const std::map<std::string, double> table = {
      {"nose", 0.026},       {"l_eye", 0.025},      {"r_eye", 0.025},
      {"l_ear", 0.035},      {"r_ear", 0.035},      {"l_shoulder", 0.079},
      {"r_shoulder", 0.079}, {"l_elbow", 0.072},    {"r_elbow", 0.072},
      {"l_wrist", 0.062},    {"r_wrist", 0.062},    {"l_hip", 0.107},
      {"r_hip", 0.107},      {"l_knee", 0.087},     {"r_knee", 0.087},
      {"l_ankle", 0.089},    {"r_ankle", 0.089},    {"neck", 0.079}};
  return table;
}

constexpr double kAreaEps = std::numeric_limits<double>::epsilon();
constexpr double kMediumMin = 32.0 * 32.0;
constexpr double kLargeMin = 96.0 * 96.0;

std::vector<double> linspace(double start, double stop, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[i] = n == 1 ? start : start + i * (stop - start) / (n - 1);
  }
  return out;
}

int labeled_count(const Person& p) { return p.num_present(); }

struct AreaRange {
  double lo;  // exclusive, except for the "all" range
  double hi;  // inclusive
  bool contains(double a) const { return a > lo && a <= hi; }
};

AreaResult evaluate_range(std::span<const Detection> dets, const GroundTruthStore& gts,
                          const EvalParams& params, std::span<const double> constants,
                          AreaRange range) {
  const std::size_t n_thr = params.thresholds.size();

  // Per-threshold pooled detection records across images.
  struct Record {
    double score;
    bool matched;
    bool ignored;
  };
  std::vector<std::vector<Record>> pooled(n_thr);
  std::size_t gt_in_range = 0;

  std::map<int, std::vector<const Detection*>> dets_by_image;
  for (const Detection& d : dets) dets_by_image[d.image_id].push_back(&d);
  // Only images known to the ground truth are evaluated.
  std::vector<int> image_ids;
  for (const ImageInfo& im : gts.images) image_ids.push_back(im.id);
  for (const GtAnnotation& a : gts.annotations) image_ids.push_back(a.image_id);
  std::sort(image_ids.begin(), image_ids.end());
  image_ids.erase(std::unique(image_ids.begin(), image_ids.end()), image_ids.end());

  for (int image_id : image_ids) {
    std::vector<const GtAnnotation*> g = gts.for_image(image_id);
    std::vector<char> g_ignore(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      g_ignore[i] = g[i]->iscrowd || labeled_count(g[i]->person) == 0 ||
                    !range.contains(g[i]->area);
    }
    // Non-ignored ground truth first, otherwise in annotation order.
    std::vector<std::size_t> g_order(g.size());
    std::iota(g_order.begin(), g_order.end(), 0);
    std::stable_sort(g_order.begin(), g_order.end(),
                     [&](std::size_t a, std::size_t b) { return g_ignore[a] < g_ignore[b]; });
    for (char ig : g_ignore) gt_in_range += ig ? 0 : 1;

    std::vector<const Detection*> d = dets_by_image[image_id];
    std::stable_sort(d.begin(), d.end(), [](const Detection* a, const Detection* b) {
      return a->score > b->score;
    });
    if (static_cast<int>(d.size()) > params.max_dets) d.resize(static_cast<std::size_t>(params.max_dets));
    if (d.empty()) continue;

    std::vector<std::vector<double>> sim(d.size(), std::vector<double>(g.size(), 0.0));
    for (std::size_t i = 0; i < d.size(); ++i) {
      for (std::size_t k = 0; k < g_order.size(); ++k) {
        const GtAnnotation& ann = *g[g_order[k]];
        if (labeled_count(ann.person) == 0) continue;
        sim[i][k] = oks(d[i]->person, ann.person, ann.area, constants);
      }
    }

    for (std::size_t t = 0; t < n_thr; ++t) {
      std::vector<char> gt_taken(g.size(), 0);
      for (std::size_t i = 0; i < d.size(); ++i) {
        double best = std::min(params.thresholds[t], 1.0 - 1e-10);
        int m = -1;
        for (std::size_t k = 0; k < g_order.size(); ++k) {
          const std::size_t gi = g_order[k];
          if (gt_taken[k] && !g[gi]->iscrowd) continue;
          if (m > -1 && !g_ignore[g_order[m]] && g_ignore[gi]) break;
          if (sim[i][k] < best) continue;
          best = sim[i][k];
          m = static_cast<int>(k);
        }
        Record rec{d[i]->score, false, false};
        if (m >= 0) {
          gt_taken[m] = 1;
          rec.matched = true;
          rec.ignored = g_ignore[g_order[m]];
        } else {
          rec.ignored = !range.contains(keypoint_box_area(d[i]->person));
        }
        pooled[t].push_back(rec);
      }
    }
  }

  AreaResult out;
  const auto recall_grid = linspace(0.0, 1.0, params.recall_points);
  double ap_sum = 0.0;
  int ap_count = 0;
  for (std::size_t t = 0; t < n_thr; ++t) {
    ThresholdResult tr;
    tr.threshold = params.thresholds[t];
    if (gt_in_range == 0) {
      out.per_threshold.push_back(tr);
      continue;
    }
    std::vector<Record>& recs = pooled[t];
    std::stable_sort(recs.begin(), recs.end(),
                     [](const Record& a, const Record& b) { return a.score > b.score; });
    std::vector<double> precision, recall;
    double tp = 0.0, fp = 0.0;
    for (const Record& r : recs) {
      if (r.ignored) continue;
      (r.matched ? tp : fp) += 1.0;
      recall.push_back(tp / static_cast<double>(gt_in_range));
      precision.push_back(tp / (tp + fp + std::numeric_limits<double>::epsilon()));
    }
    tr.recall = recall.empty() ? 0.0 : recall.back();
    for (std::size_t i = precision.size(); i-- > 1;) {
      precision[i - 1] = std::max(precision[i - 1], precision[i]);
    }
    tr.precision.assign(recall_grid.size(), 0.0);
    for (std::size_t ri = 0; ri < recall_grid.size(); ++ri) {
      const auto it = std::lower_bound(recall.begin(), recall.end(), recall_grid[ri]);
      if (it == recall.end()) break;
      tr.precision[ri] = precision[static_cast<std::size_t>(it - recall.begin())];
    }
    tr.ap = std::accumulate(tr.precision.begin(), tr.precision.end(), 0.0) /
            static_cast<double>(tr.precision.size());
    ap_sum += tr.ap;
    ++ap_count;
    out.per_threshold.push_back(tr);
  }
  out.ap = ap_count > 0 ? ap_sum / ap_count : -1.0;
  return out;
}

double threshold_ap(const AreaResult& r, double threshold) {
  for (const ThresholdResult& t : r.per_threshold) {
    if (std::abs(t.threshold - threshold) < 1e-9) return t.ap;
  }
  return -1.0;
}

ParseError parse_error(const std::string& where, const std::string& what) {
  return ParseError(where, what);
}

Person parse_keypoints(const nlohmann::json& kps, const SkeletonDef& def,
                       const std::string& where, bool results) {
  const int m = def.num_joints();
  if (!kps.is_array() || static_cast<int>(kps.size()) != 3 * m) {
    throw parse_error(where, "expected " + std::to_string(3 * m) + " values, got " +
                                 (kps.is_array() ? std::to_string(kps.size()) : "non-array"));
  }
  Person p(m);
  for (int j = 0; j < m; ++j) {
    const auto& x = kps[3 * j];
    const auto& y = kps[3 * j + 1];
    const auto& v = kps[3 * j + 2];
    if (!x.is_number() || !y.is_number() || !v.is_number()) {
      throw parse_error(where + "[" + std::to_string(3 * j) + "]", "keypoint values must be numbers");
    }
    const double flag = v.get<double>();
    if (flag == 0.0) continue;
    Visibility vis = Visibility::kVisible;
    if (!results) {
      if (flag == 1.0) {
        vis = Visibility::kOccluded;
      } else if (flag != 2.0) {
        throw parse_error(where + "[" + std::to_string(3 * j + 2) + "]",
                          "visibility flag must be 0, 1 or 2");
      }
    }
    p.keypoints[j] = Keypoint{x.get<double>(), y.get<double>(), vis, 1.0};
  }
  return p;
}

nlohmann::json keypoint_array(const Person& p) {
  nlohmann::json kps = nlohmann::json::array();
  for (const auto& k : p.keypoints) {
    if (k) {
      kps.push_back(k->x);
      kps.push_back(k->y);
      kps.push_back(static_cast<int>(k->visibility));
    } else {
      kps.push_back(0);
      kps.push_back(0);
      kps.push_back(0);
    }
  }
  return kps;
}

}  // namespace

std::vector<double> default_oks_constants(const SkeletonDef& def) {
  std::vector<double> k;
  for (const std::string& name : def.joint_names) {
    const auto it = coco_sigmas().find(name);
    k.push_back(2.0 * (it == coco_sigmas().end() ? coco_sigmas().at("l_shoulder") : it->second));
  }
  return k;
}

double oks(const Person& det, const Person& gt, double gt_area,
           std::span<const double> constants) {
  if (constants.size() < gt.keypoints.size()) {
    throw std::invalid_argument("oks: fewer constants than joint slots");
  }
  double total = 0.0;
  int labeled = 0;
  for (std::size_t j = 0; j < gt.keypoints.size(); ++j) {
    if (!gt.keypoints[j]) continue;
    ++labeled;
    if (j >= det.keypoints.size() || !det.keypoints[j]) continue;
    const double dx = det.keypoints[j]->x - gt.keypoints[j]->x;
    const double dy = det.keypoints[j]->y - gt.keypoints[j]->y;
    const double k = constants[j];
    total += std::exp(-(dx * dx + dy * dy) / (2.0 * (gt_area + kAreaEps) * k * k));
  }
  if (labeled == 0) throw std::invalid_argument("oks: ground truth has no labeled keypoints");
  return total / labeled;
}

const ImageInfo* GroundTruthStore::image(int id) const {
  for (const ImageInfo& im : images) {
    if (im.id == id) return &im;
  }
  return nullptr;
}

std::vector<const GtAnnotation*> GroundTruthStore::for_image(int image_id) const {
  std::vector<const GtAnnotation*> out;
  for (const GtAnnotation& a : annotations) {
    if (a.image_id == image_id) out.push_back(&a);
  }
  return out;
}

Detection make_detection(int image_id, Person person) {
  double sum = 0.0;
  int n = 0;
  for (const auto& k : person.keypoints) {
    if (!k) continue;
    sum += k->confidence;
    ++n;
  }
  return {image_id, std::move(person), n ? sum / n : 0.0};
}

double keypoint_box_area(const Person& person) {
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
  double x1 = -x0, y1 = -x0;
  for (const auto& k : person.keypoints) {
    if (!k) continue;
    x0 = std::min(x0, k->x);
    x1 = std::max(x1, k->x);
    y0 = std::min(y0, k->y);
    y1 = std::max(y1, k->y);
  }
  return x1 < x0 ? 0.0 : (x1 - x0) * (y1 - y0);
}

EvalParams EvalParams::coco(const SkeletonDef& def) {
  EvalParams p;
  p.thresholds = linspace(0.5, 0.95, 10);
  p.constants = default_oks_constants(def);
  return p;
}

EvalResult average_precision(std::span<const Detection> dets, const GroundTruthStore& gts,
                             const EvalParams& params) {
  if (params.thresholds.empty()) throw ConfigError("average_precision: no OKS thresholds");
  if (params.recall_points < 2) throw ConfigError("average_precision: need >= 2 recall points");
  const std::span<const double> constants = params.constants;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  EvalResult r;
  r.all = evaluate_range(dets, gts, params, constants, {-kInf, kInf});
  r.medium = evaluate_range(dets, gts, params, constants, {kMediumMin, kLargeMin});
  r.large = evaluate_range(dets, gts, params, constants, {kLargeMin, kInf});
  r.ap = r.all.ap;
  r.ap50 = threshold_ap(r.all, 0.5);
  r.ap75 = threshold_ap(r.all, 0.75);
  r.ap_medium = r.medium.ap;
  r.ap_large = r.large.ap;
  return r;
}

nlohmann::json to_json(const EvalResult& r) {
  nlohmann::json per = nlohmann::json::array();
  for (const ThresholdResult& t : r.all.per_threshold) {
    per.push_back({{"threshold", t.threshold}, {"ap", t.ap}, {"recall", t.recall}});
  }
  return {{"AP", r.ap},          {"AP50", r.ap50},       {"AP75", r.ap75},
          {"APM", r.ap_medium},  {"APL", r.ap_large},    {"per_threshold", per}};
}

std::string format_metrics_table(const EvalResult& r, const std::string& label) {
  std::ostringstream os;
  os << std::left << std::setw(14) << "Method" << std::right;
  for (const char* h : {"AP", "AP50", "AP75", "APM", "APL"}) os << std::setw(8) << h;
  os << "\n" << std::left << std::setw(14) << label << std::right << std::fixed
     << std::setprecision(3);
  for (double v : {r.ap, r.ap50, r.ap75, r.ap_medium, r.ap_large}) os << std::setw(8) << v;
  os << "\n";
  return os.str();
}

GroundTruthStore parse_annotations(const nlohmann::json& doc, const SkeletonDef& def) {
  if (!doc.is_object()) throw parse_error("", "document must be a JSON object");
  GroundTruthStore store;
  try {
    if (doc.contains("images")) {
      const auto& images = doc.at("images");
      if (!images.is_array()) throw parse_error("images", "must be an array");
      for (std::size_t i = 0; i < images.size(); ++i) {
        const std::string where = "images[" + std::to_string(i) + "]";
        const auto& im = images[i];
        if (!im.is_object() || !im.contains("id")) throw parse_error(where, "missing id");
        ImageInfo info;
        info.id = im.at("id").get<int>();
        info.width = im.value("width", 0);
        info.height = im.value("height", 0);
        info.file_name = im.value("file_name", std::string());
        store.images.push_back(info);
      }
    }
    if (!doc.contains("annotations") || !doc.at("annotations").is_array()) {
      throw parse_error("annotations", "missing or not an array");
    }
    const auto& anns = doc.at("annotations");
    for (std::size_t i = 0; i < anns.size(); ++i) {
      const std::string where = "annotations[" + std::to_string(i) + "]";
      const auto& a = anns[i];
      if (!a.is_object() || !a.contains("image_id")) throw parse_error(where, "missing image_id");
      GtAnnotation ann;
      ann.id = a.value("id", static_cast<int>(i) + 1);
      ann.image_id = a.at("image_id").get<int>();
      ann.iscrowd = a.value("iscrowd", 0) != 0;
      if (a.contains("keypoints")) {
        ann.person = parse_keypoints(a.at("keypoints"), def, where + ".keypoints", false);
      } else if (ann.iscrowd) {
        ann.person = Person(def.num_joints());
      } else {
        throw parse_error(where, "missing keypoints");
      }
      if (a.contains("bbox")) {
        const auto& b = a.at("bbox");
        if (!b.is_array() || b.size() != 4) throw parse_error(where + ".bbox", "expected [x, y, w, h]");
        ann.bbox = std::array<double, 4>{b[0].get<double>(), b[1].get<double>(),
                                         b[2].get<double>(), b[3].get<double>()};
      }
      ann.area = a.contains("area") ? a.at("area").get<double>() : keypoint_box_area(ann.person);
      store.annotations.push_back(std::move(ann));
    }
  } catch (const nlohmann::json::exception& e) {
    throw parse_error("", e.what());
  }
  return store;
}

GroundTruthStore parse_annotations(const std::string& text, const SkeletonDef& def) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw parse_error("byte " + std::to_string(e.byte), e.what());
  }
  return parse_annotations(doc, def);
}

nlohmann::json write_annotations(const GroundTruthStore& store, const SkeletonDef& def) {
  nlohmann::json images = nlohmann::json::array();
  for (const ImageInfo& im : store.images) {
    images.push_back({{"id", im.id},
                      {"width", im.width},
                      {"height", im.height},
                      {"file_name", im.file_name}});
  }
  nlohmann::json anns = nlohmann::json::array();
  for (const GtAnnotation& a : store.annotations) {
    nlohmann::json j = {{"id", a.id},
                        {"image_id", a.image_id},
                        {"category_id", 1},
                        {"keypoints", keypoint_array(a.person)},
                        {"num_keypoints", a.person.num_present()},
                        {"area", a.area},
                        {"iscrowd", a.iscrowd ? 1 : 0}};
    if (a.bbox) j["bbox"] = *a.bbox;
    anns.push_back(std::move(j));
  }
  nlohmann::json skeleton = nlohmann::json::array();
  for (const Limb& l : def.limbs) skeleton.push_back({l.from + 1, l.to + 1});
  return {{"images", images},
          {"annotations", anns},
          {"categories",
           {{{"id", 1}, {"name", "person"}, {"keypoints", def.joint_names}, {"skeleton", skeleton}}}}};
}

nlohmann::json write_results(std::span<const Detection> dets) {
  nlohmann::json out = nlohmann::json::array();
  for (const Detection& d : dets) {
    nlohmann::json scores = nlohmann::json::array();
    for (const auto& k : d.person.keypoints) scores.push_back(k ? k->confidence : 0.0);
    out.push_back({{"image_id", d.image_id},
                   {"category_id", 1},
                   {"keypoints", keypoint_array(d.person)},
                   {"keypoint_scores", scores},
                   {"score", d.score}});
  }
  return out;
}

std::vector<Detection> parse_results(const nlohmann::json& doc, const SkeletonDef& def) {
  if (!doc.is_array()) throw parse_error("", "results must be a JSON array");
  std::vector<Detection> out;
  try {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const std::string where = "[" + std::to_string(i) + "]";
      const auto& r = doc[i];
      if (!r.is_object() || !r.contains("image_id") || !r.contains("keypoints") ||
          !r.contains("score")) {
        throw parse_error(where, "needs image_id, keypoints and score");
      }
      Detection d;
      d.image_id = r.at("image_id").get<int>();
      d.person = parse_keypoints(r.at("keypoints"), def, where + ".keypoints", true);
      d.score = r.at("score").get<double>();
      if (r.contains("keypoint_scores")) {
        const auto& s = r.at("keypoint_scores");
        if (!s.is_array() || static_cast<int>(s.size()) != def.num_joints()) {
          throw parse_error(where + ".keypoint_scores", "expected one score per joint");
        }
        for (int j = 0; j < def.num_joints(); ++j) {
          if (d.person.keypoints[j]) d.person.keypoints[j]->confidence = s[j].get<double>();
        }
      }
      out.push_back(std::move(d));
    }
  } catch (const nlohmann::json::exception& e) {
    throw parse_error("", e.what());
  }
  return out;
}

MaskMap crowd_mask(const GroundTruthStore& store, int image_id, MapDims dims, int stride) {
  MaskMap mask = MaskMap::ones(dims);
  for (const GtAnnotation* a : store.for_image(image_id)) {
    if (a->iscrowd && a->bbox) {
      const auto& b = *a->bbox;
      mask.clear_box(b[0], b[1], b[2], b[3], stride);
    }
  }
  return mask;
}

}  // namespace mlnpose
