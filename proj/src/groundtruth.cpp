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
#include "mlnpose/groundtruth.hpp"

#include <algorithm>
#include <cmath>

#include "mlnpose/errors.hpp"

namespace mlnpose {

void GtConfig::validate() const {
  if (!(sigma > 0.0)) throw ConfigError("sigma must be > 0");
  if (!(limb_half_width > 0.0)) throw ConfigError("limb_half_width must be > 0");
  if (output_stride < 1) throw ConfigError("output_stride must be >= 1");
}

MapDims map_dims_for(ImageDims dims, int output_stride) {
  return {dims.height / output_stride, dims.width / output_stride};
}

MaskMap MaskMap::ones(MapDims dims) {
  MaskMap m;
  m.height = dims.height;
  m.width = dims.width;
  m.values.assign(static_cast<std::size_t>(dims.height) * dims.width, 1);
  return m;
}

void MaskMap::clear_box(double x, double y, double w, double h, int stride) {
  for (int cy = 0; cy < height; ++cy) {
    const double py = cell_center(cy, stride);
    if (py < y || py > y + h) continue;
    for (int cx = 0; cx < width; ++cx) {
      const double px = cell_center(cx, stride);
      if (px >= x && px <= x + w) values[static_cast<std::size_t>(cy) * width + cx] = 0;
    }
  }
}

namespace {

const Keypoint* visible(const Person& p, int joint) {
  if (joint < 0 || joint >= static_cast<int>(p.keypoints.size())) return nullptr;
  const auto& k = p.keypoints[static_cast<std::size_t>(joint)];
  return k && k->visibility == Visibility::kVisible ? &*k : nullptr;
}

void check_same_shape(const Tensor& pred, const Tensor& gt, const MaskMap& mask,
                      const char* what) {
  if (!(pred.shape() == gt.shape())) {
    throw ShapeError(std::string(what) + ": prediction " + pred.shape().str() +
                     " vs ground truth " + gt.shape().str());
  }
  if (mask.height != pred.shape().h || mask.width != pred.shape().w) {
    throw ShapeError(std::string(what) + ": mask is " + std::to_string(mask.height) +
                     "x" + std::to_string(mask.width) + ", maps are " +
                     pred.shape().str());
  }
}

double masked_sq_error(const Tensor& pred, const Tensor& gt, const MaskMap& mask,
                       const char* what) {
  check_same_shape(pred, gt, mask, what);
  const Shape& s = pred.shape();
  const std::size_t plane = s.plane_size();
  const auto p = pred.data();
  const auto g = gt.data();
  double total = 0.0;
  for (std::size_t base = 0; base < p.size(); base += plane) {
    for (std::size_t i = 0; i < plane; ++i) {
      if (!mask.values[i]) continue;
      const double d = static_cast<double>(p[base + i]) - g[base + i];
      total += d * d;
    }
  }
  return total;
}

}  // namespace

Tensor render_joint_map(std::span<const Person> people, int joint_type,
                        const GtConfig& cfg, MapDims dims) {
  cfg.validate();
  Tensor map(Shape{1, 1, dims.height, dims.width});
  const double inv_var = 1.0 / (cfg.sigma * cfg.sigma);
  // exp(-d^2/sigma^2) underflows float beyond ~10 sigma.
  const double reach = 10.0 * cfg.sigma;
  for (const Person& person : people) {
    const Keypoint* k = visible(person, joint_type);
    if (!k) continue;
    const int stride = cfg.output_stride;
    const int x0 = std::max(0, static_cast<int>(std::floor((k->x - reach) / stride)));
    const int x1 = std::min(dims.width - 1, static_cast<int>(std::ceil((k->x + reach) / stride)));
    const int y0 = std::max(0, static_cast<int>(std::floor((k->y - reach) / stride)));
    const int y1 = std::min(dims.height - 1, static_cast<int>(std::ceil((k->y + reach) / stride)));
    for (int cy = y0; cy <= y1; ++cy) {
      const double dy = cell_center(cy, stride) - k->y;
      for (int cx = x0; cx <= x1; ++cx) {
        const double dx = cell_center(cx, stride) - k->x;
        const auto v = static_cast<float>(std::exp(-(dx * dx + dy * dy) * inv_var));
        float& cell = map.at(0, 0, cy, cx);
        cell = std::max(cell, v);
      }
    }
  }
  return map;
}

Tensor render_background_map(std::span<const Tensor> joint_maps) {
  if (joint_maps.empty()) throw ShapeError("render_background_map: no joint maps");
  const Shape s = joint_maps.front().shape();
  Tensor bg(s, 1.0f);
  std::vector<float> peak(s.numel(), 0.0f);
  for (const Tensor& m : joint_maps) {
    if (!(m.shape() == s)) throw ShapeError("render_background_map: map shapes differ");
    const auto d = m.data();
    for (std::size_t i = 0; i < peak.size(); ++i) peak[i] = std::max(peak[i], d[i]);
  }
  auto out = bg.data();
  for (std::size_t i = 0; i < peak.size(); ++i) out[i] = 1.0f - peak[i];
  return bg;
}

Tensor render_paf(std::span<const Person> people, const SkeletonDef& def,
                  int limb_type, const GtConfig& cfg, MapDims dims) {
  cfg.validate();
  if (limb_type < 0 || limb_type >= def.num_limbs()) {
    throw ConfigError("render_paf: limb type " + std::to_string(limb_type) +
                      " outside [0, " + std::to_string(def.num_limbs()) + ")");
  }
  const Limb limb = def.limbs[static_cast<std::size_t>(limb_type)];
  const int stride = cfg.output_stride;
  const double half_width = cfg.limb_half_width * stride;
  const std::size_t cells = static_cast<std::size_t>(dims.height) * dims.width;
  std::vector<double> sum_x(cells, 0.0), sum_y(cells, 0.0);
  std::vector<int> count(cells, 0);

  for (const Person& person : people) {
    const Keypoint* a = visible(person, limb.from);
    const Keypoint* b = visible(person, limb.to);
    if (!a || !b) continue;
    const double ex = b->x - a->x;
    const double ey = b->y - a->y;
    const double length = std::hypot(ex, ey);
    if (length == 0.0) continue;
    const double ux = ex / length;
    const double uy = ey / length;
    const int x0 = std::max(0, static_cast<int>(std::floor((std::min(a->x, b->x) - half_width) / stride)));
    const int x1 = std::min(dims.width - 1, static_cast<int>(std::ceil((std::max(a->x, b->x) + half_width) / stride)));
    const int y0 = std::max(0, static_cast<int>(std::floor((std::min(a->y, b->y) - half_width) / stride)));
    const int y1 = std::min(dims.height - 1, static_cast<int>(std::ceil((std::max(a->y, b->y) + half_width) / stride)));
    for (int cy = y0; cy <= y1; ++cy) {
      const double py = cell_center(cy, stride) - a->y;
      for (int cx = x0; cx <= x1; ++cx) {
        const double px = cell_center(cx, stride) - a->x;
        const double along = px * ux + py * uy;
        const double across = std::abs(px * uy - py * ux);
        if (along < 0.0 || along > length || across > half_width) continue;
        const std::size_t i = static_cast<std::size_t>(cy) * dims.width + cx;
        sum_x[i] += ux;
        sum_y[i] += uy;
        ++count[i];
      }
    }
  }

  Tensor paf(Shape{1, 2, dims.height, dims.width});
  auto px = paf.plane(0, 0);
  auto py = paf.plane(0, 1);
  for (std::size_t i = 0; i < cells; ++i) {
    if (count[i] == 0) continue;
    px[i] = static_cast<float>(sum_x[i] / count[i]);
    py[i] = static_cast<float>(sum_y[i] / count[i]);
  }
  return paf;
}

Tensor render_joint_stack(std::span<const Person> people,
                          const SkeletonDef& def, const GtConfig& cfg,
                          MapDims dims) {
  std::vector<Tensor> maps;
  maps.reserve(static_cast<std::size_t>(def.joint_channels()));
  for (int j = 0; j < def.num_joints(); ++j) {
    maps.push_back(render_joint_map(people, j, cfg, dims));
  }
  if (def.background_channel) maps.push_back(render_background_map(maps));
  Tensor stack(Shape{1, static_cast<int>(maps.size()), dims.height, dims.width});
  for (std::size_t c = 0; c < maps.size(); ++c) {
    const auto src = maps[c].data();
    std::copy(src.begin(), src.end(), stack.plane(0, static_cast<int>(c)).begin());
  }
  return stack;
}

Tensor render_paf_stack(std::span<const Person> people, const SkeletonDef& def,
                        const GtConfig& cfg, MapDims dims) {
  Tensor stack(Shape{1, def.limb_channels(), dims.height, dims.width});
  for (int l = 0; l < def.num_limbs(); ++l) {
    const Tensor paf = render_paf(people, def, l, cfg, dims);
    for (int c = 0; c < 2; ++c) {
      const auto src = paf.plane(0, c);
      std::copy(src.begin(), src.end(), stack.plane(0, 2 * l + c).begin());
    }
  }
  return stack;
}

double joint_loss(const Tensor& pred, const Tensor& gt, const MaskMap& mask) {
  return masked_sq_error(pred, gt, mask, "joint_loss");
}

double limb_loss(const Tensor& pred, const Tensor& gt, const MaskMap& mask) {
  return masked_sq_error(pred, gt, mask, "limb_loss");
}

Tensor loss_gradient(const Tensor& pred, const Tensor& gt, const MaskMap& mask) {
  check_same_shape(pred, gt, mask, "loss_gradient");
  Tensor grad(pred.shape());
  const std::size_t plane = pred.shape().plane_size();
  const auto p = pred.data();
  const auto g = gt.data();
  auto out = grad.data();
  for (std::size_t base = 0; base < p.size(); base += plane) {
    for (std::size_t i = 0; i < plane; ++i) {
      if (!mask.values[i]) continue;
      out[base + i] = static_cast<float>(2.0 * (static_cast<double>(p[base + i]) - g[base + i]));
    }
  }
  return grad;
}

}  // namespace mlnpose
