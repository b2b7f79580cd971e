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

#include <span>
#include <vector>

#include "json.hpp"
#include "mlnpose/skeleton.hpp"
#include "mlnpose/tensor.hpp"

namespace mlnpose {

struct DecodeParams {
  double nms_threshold = 0.1;
  int samples = 10;  // D: points sampled along each candidate segment
  double sample_threshold = 0.05;
  double min_valid_fraction = 0.8;
  int min_parts_per_person = 3;
  double min_mean_person_score = 0.2;
  bool filters_enabled = true;
  int output_stride = 8;

  void validate() const;
};

void to_json(nlohmann::json& j, const DecodeParams& p);
void from_json(const nlohmann::json& j, DecodeParams& p);

/// A local maximum of one joint map, in input-pixel coordinates.
struct PeakCandidate {
  int joint_type = 0;
  double x = 0.0;
  double y = 0.0;
  float score = 0.0f;
  int id = 0;  // unique per image
};

struct ConnectionCandidate {
  int limb_type = 0;
  int peak_a = 0;  // id of the peak of the limb's first joint type
  int peak_b = 0;
  double score = 0.0;  // mean PAF alignment over the samples
  int sample_count = 0;
  double valid_fraction = 0.0;
};

/// Cells >= the threshold that beat their 4-neighbourhood: >= right and
/// bottom, strictly > left and top. Positions are refined by a per-axis
/// parabola through the log values of the peak and its two neighbours, then
/// mapped to input pixels at the cell-center convention. Ids start at
/// `first_id` and follow row-major scan order.
std::vector<PeakCandidate> nms_peaks(const PlaneView& map, const DecodeParams& params,
                                     int joint_type = 0, int first_id = 0);

/// Samples the PAF bilinearly at the midpoints of `samples` equal segments
/// of a->b and averages the dot product with the unit direction a->b.
/// Throws std::invalid_argument when a and b coincide.
ConnectionCandidate connection_score(const PeakCandidate& a, const PeakCandidate& b,
                                     const PlaneView& paf_x, const PlaneView& paf_y,
                                     const DecodeParams& params, int limb_type = 0);

/// Every (a, b) pair scored; row-major over (cands_a, cands_b).
std::vector<ConnectionCandidate> score_limb(std::span<const PeakCandidate> cands_a,
                                            std::span<const PeakCandidate> cands_b,
                                            const PlaneView& paf_x, const PlaneView& paf_y,
                                            const DecodeParams& params, int limb_type = 0);

/// Greedy selection from scored pairs: highest score first (ties by ids),
/// each peak used at most once, at most min(|A|, |B|) connections.
std::vector<ConnectionCandidate> select_connections(std::vector<ConnectionCandidate> scored,
                                                    std::size_t count_a, std::size_t count_b,
                                                    const DecodeParams& params);

/// score_limb followed by select_connections.
std::vector<ConnectionCandidate> match_limb(std::span<const PeakCandidate> cands_a,
                                            std::span<const PeakCandidate> cands_b,
                                            const PlaneView& paf_x, const PlaneView& paf_y,
                                            const DecodeParams& params, int limb_type = 0);

/// A person as peak ids per joint slot (-1 when empty).
struct PersonAssembly {
  std::vector<int> peak_ids;
  int min_peak_id() const;
};

/// `connections[l]` holds the accepted connections of limb type l; `peaks`
/// must be indexable by id. Persons are ordered by their smallest peak id.
std::vector<PersonAssembly> assemble(std::span<const std::vector<ConnectionCandidate>> connections,
                                     std::span<const PeakCandidate> peaks,
                                     const SkeletonDef& def, const DecodeParams& params);

std::vector<Person> assemble_skeletons(std::span<const std::vector<ConnectionCandidate>> connections,
                                       std::span<const PeakCandidate> peaks,
                                       const SkeletonDef& def, const DecodeParams& params);

Person to_person(const PersonAssembly& assembly, std::span<const PeakCandidate> peaks);

/// Every intermediate stage of one decode.
struct DecodeTrace {
  std::vector<PeakCandidate> peaks;                   // indexed by id
  std::vector<std::vector<int>> peaks_by_joint;       // ids per joint type
  std::vector<std::vector<ConnectionCandidate>> connections;  // per limb type
  std::vector<PersonAssembly> assemblies;
  std::vector<Person> persons;
};

/// Maps are (1, joint_channels, H, W) and (1, 2n, H, W).
DecodeTrace decode_trace(const Tensor& joint_maps, const Tensor& limb_maps,
                         const SkeletonDef& def, const DecodeParams& params);

std::vector<Person> decode(const Tensor& joint_maps, const Tensor& limb_maps,
                           const SkeletonDef& def, const DecodeParams& params);

}  // namespace mlnpose
