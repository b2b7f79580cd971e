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

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlnpose/groundtruth.hpp"
#include "mlnpose/skeleton.hpp"

namespace mlnpose {

/// Per-joint OKS falloff constants k_i (twice the COCO per-keypoint sigmas).
/// Joints outside the 17 COCO keypoints ("neck") use the shoulder value.
std::vector<double> default_oks_constants(const SkeletonDef& def);

/// Object keypoint similarity. Averages exp(-d^2 / (2 area k^2)) over the
/// keypoints present in `gt`; a missing detection keypoint contributes 0.
/// Throws std::invalid_argument if `gt` has no labeled keypoints.
double oks(const Person& det, const Person& gt, double gt_area,
           std::span<const double> constants);

struct ImageInfo {
  int id = 0;
  int width = 0;
  int height = 0;
  std::string file_name;
};

struct GtAnnotation {
  int id = 0;
  int image_id = 0;
  Person person;
  double area = 0.0;
  bool iscrowd = false;
  std::optional<std::array<double, 4>> bbox;  // x, y, w, h
};

struct GroundTruthStore {
  std::vector<ImageInfo> images;
  std::vector<GtAnnotation> annotations;

  const ImageInfo* image(int id) const;
  std::vector<const GtAnnotation*> for_image(int image_id) const;
};

struct Detection {
  int image_id = 0;
  Person person;
  double score = 0.0;
};

/// Instance score = mean confidence over the present keypoints (0 if none).
Detection make_detection(int image_id, Person person);

/// Keypoint-extent box area, used for synthetic ground truth and for
/// detections in the area-range filters.
double keypoint_box_area(const Person& person);

struct EvalParams {
  std::vector<double> thresholds;  // default 0.50:0.05:0.95
  int recall_points = 101;
  int max_dets = 20;
  std::vector<double> constants;  // empty selects default_oks_constants

  static EvalParams coco(const SkeletonDef& def);
};

struct ThresholdResult {
  double threshold = 0.0;
  double ap = -1.0;                // -1 when no ground truth is in range
  double recall = -1.0;            // final recall
  std::vector<double> precision;   // interpolated, one per recall point
};

struct AreaResult {
  double ap = -1.0;  // mean over thresholds with ground truth, else -1
  std::vector<ThresholdResult> per_threshold;
};

struct EvalResult {
  double ap = -1.0;
  double ap50 = -1.0;
  double ap75 = -1.0;
  double ap_medium = -1.0;
  double ap_large = -1.0;
  AreaResult all;
  AreaResult medium;
  AreaResult large;
};

/// COCO-style keypoint AP. Ground truth that is crowd, unlabeled or outside
/// the area range is ignored; medium is area in (32^2, 96^2], large > 96^2.
EvalResult average_precision(std::span<const Detection> dets, const GroundTruthStore& gts,
                             const EvalParams& params);

nlohmann::json to_json(const EvalResult& r);
/// Aligned text table with AP, AP50, AP75, APM and APL columns.
std::string format_metrics_table(const EvalResult& r, const std::string& label);

/// Parses the COCO keypoints subset: images, annotations (keypoints triplets
/// of length 3m, area, iscrowd, optional bbox). Throws ParseError naming the
/// location of the first problem.
GroundTruthStore parse_annotations(const nlohmann::json& doc, const SkeletonDef& def);
GroundTruthStore parse_annotations(const std::string& text, const SkeletonDef& def);
nlohmann::json write_annotations(const GroundTruthStore& store, const SkeletonDef& def);

/// COCO results array: [{image_id, category_id, keypoints, score}], plus a
/// per-keypoint "keypoint_scores" array.
nlohmann::json write_results(std::span<const Detection> dets);
std::vector<Detection> parse_results(const nlohmann::json& doc, const SkeletonDef& def);

/// Loss mask for one image with crowd boxes zeroed.
MaskMap crowd_mask(const GroundTruthStore& store, int image_id, MapDims dims, int stride);

}  // namespace mlnpose
