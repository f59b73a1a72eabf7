// Copyright 2026 The roadloc Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "roadloc/targets.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>

#include "roadloc/annotation.hpp"
#include "roadloc/error.hpp"

namespace roadloc {

TargetMaps TargetMaps::zeros(const GridConfig& cfg) {
  if (cfg.stride <= 0 || cfg.input_width % cfg.stride != 0 || cfg.input_height % cfg.stride != 0) {
    throw Error(ErrorCode::kInvalidArgument, "input size must be a positive multiple of the stride");
  }
  const int gh = cfg.grid_height(), gw = cfg.grid_width();
  TargetMaps maps;
  maps.mc = Grid(gh, gw, cfg.num_classes);
  maps.mco = Grid(gh, gw, 2);
  maps.mv = Grid(gh, gw, 16);
  maps.ms = Grid(gh, gw, 3);
  maps.stride = cfg.stride;
  maps.num_classes = cfg.num_classes;
  return maps;
}

void TargetMaps::check_shapes() const {
  const int gh = mc.height(), gw = mc.width();
  auto plane_ok = [&](const Grid& g, int ch) {
    return g.height() == gh && g.width() == gw && g.channels() == ch;
  };
  if (mc.channels() != num_classes || !plane_ok(mco, 2) || !plane_ok(mv, 16) || !plane_ok(ms, 3)) {
    throw Error(ErrorCode::kShapeMismatch, "target maps have inconsistent shapes");
  }
}

void FusionWeights::validate() const {
  double sum = 0.0;
  for (double wi : w) {
    if (!(wi >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "fusion weights must be non-negative");
    sum += wi;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::kInvalidArgument, "fusion weights must sum to 1");
}

double gaussian_radius(double w, double h, double o) {
  const double s = w + h, a = w * h;
  // Both corners shifted the same way: (w - r)(h - r) / (2wh - (w - r)(h - r)) = o.
  const double c1 = a * (1.0 - o) / (1.0 + o);
  const double r1 = (s - std::sqrt(std::max(s * s - 4.0 * c1, 0.0))) / 2.0;
  // Shrunk inside: (w - 2r)(h - 2r) / wh = o.
  const double r2 = (2.0 * s - std::sqrt(std::max(4.0 * s * s - 16.0 * (1.0 - o) * a, 0.0))) / 8.0;
  // Grown outside: wh / ((w + 2r)(h + 2r)) = o.
  const double r3 = (-2.0 * o * s + std::sqrt(4.0 * o * o * s * s + 16.0 * o * (1.0 - o) * a)) / (8.0 * o);
  return std::max(0.0, std::min({r1, r2, r3}));
}

double gaussian_sigma(double w_cells, double h_cells) {
  return std::max(gaussian_radius(w_cells, h_cells) / 3.0, 2.0 / 3.0);
}

namespace {

void draw_gaussian(Grid& mc, int channel, int row, int col, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  const double denom = 2.0 * sigma * sigma;
  for (int r = std::max(0, row - radius); r <= std::min(mc.height() - 1, row + radius); ++r) {
    for (int c = std::max(0, col - radius); c <= std::min(mc.width() - 1, col + radius); ++c) {
      const double dr = r - row, dc = c - col;
      const double g = (dr == 0 && dc == 0) ? 1.0 : std::exp(-(dr * dr + dc * dc) / denom);
      double& cell = mc.at(r, c, channel);
      cell = std::max(cell, g);
    }
  }
}

}  // namespace

TargetMaps encode(std::span<const Annotation> annotations, const GridConfig& cfg) {
  TargetMaps maps = TargetMaps::zeros(cfg);
  const double s = cfg.stride;
  std::map<std::pair<int, int>, std::pair<std::size_t, double>> owner;  // cell -> (peak, area)

  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const Annotation& ann = annotations[i];
    if (ann.class_id < 0 || ann.class_id >= cfg.num_classes) {
      throw Error(ErrorCode::kInvalidArgument, "annotation class out of range", i);
    }
    const double u = ann.centroid_uv.u, v = ann.centroid_uv.v;
    if (!(u >= 0.0 && u < cfg.input_width && v >= 0.0 && v < cfg.input_height)) {
      throw Error(ErrorCode::kOutOfBounds, "annotation centroid lies outside the input image", i);
    }
    const int col = static_cast<int>(std::floor(u / s));
    const int row = static_cast<int>(std::floor(v / s));

    const Rect2D rect = min_external_rect(ann.vertices_uv);
    const double sigma = gaussian_sigma(rect.width() / s, rect.height() / s);
    draw_gaussian(maps.mc, ann.class_id, row, col, sigma);

    const double area = rect.area();
    std::size_t peak_index = maps.peaks.size();
    if (auto it = owner.find({row, col}); it != owner.end()) {
      ++maps.collisions;
      std::clog << "warning: two centroids share grid cell (" << row << ", " << col
                << "); keeping the larger object's regression targets\n";
      if (area <= it->second.second) continue;
      peak_index = it->second.first;
      it->second.second = area;
    } else {
      owner[{row, col}] = {peak_index, area};
      maps.peaks.emplace_back();
    }

    PeakTarget& peak = maps.peaks[peak_index];
    peak.row = row;
    peak.col = col;
    peak.class_id = ann.class_id;
    peak.anchor_p2.reset();
    if (ann.centroid_xyz) {
      const auto& c = *ann.centroid_xyz;
      peak.anchor_p2 = WorldPoint{c.x - ann.dim.w / 2.0, c.y - ann.dim.l / 2.0, c.z - ann.dim.h / 2.0};
    }

    maps.mco.at(row, col, 0) = u / s - col;
    maps.mco.at(row, col, 1) = v / s - row;
    for (int k = 0; k < 8; ++k) {
      maps.mv.at(row, col, 2 * k) = ann.vertices_uv[k].u / s;
      maps.mv.at(row, col, 2 * k + 1) = ann.vertices_uv[k].v / s;
    }
    maps.ms.at(row, col, 0) = ann.dim.l;
    maps.ms.at(row, col, 1) = ann.dim.w;
    maps.ms.at(row, col, 2) = ann.dim.h;
  }
  return maps;
}

std::vector<Detection> decode(const TargetMaps& maps, const DecodeOptions& options) {
  maps.check_shapes();
  struct Candidate {
    double score;
    int ch, row, col;
  };
  std::vector<Candidate> candidates;
  const Grid& mc = maps.mc;
  for (int ch = 0; ch < mc.channels(); ++ch) {
    for (int r = 0; r < mc.height(); ++r) {
      for (int c = 0; c < mc.width(); ++c) {
        const double val = mc.at(r, c, ch);
        if (!(val >= options.threshold) || val <= 0.0) continue;
        bool is_max = true;
        for (int dr = -1; dr <= 1 && is_max; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int rr = r + dr, cc = c + dc;
            if ((dr == 0 && dc == 0) || rr < 0 || cc < 0 || rr >= mc.height() || cc >= mc.width()) continue;
            if (mc.at(rr, cc, ch) > val) {
              is_max = false;
              break;
            }
          }
        }
        if (is_max) candidates.push_back({val, ch, r, c});
      }
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  if (candidates.size() > static_cast<std::size_t>(std::max(options.max_objects, 0))) {
    candidates.resize(static_cast<std::size_t>(std::max(options.max_objects, 0)));
  }

  const double s = maps.stride;
  std::vector<Detection> out;
  out.reserve(candidates.size());
  for (const auto& cand : candidates) {
    Detection det;
    det.class_id = cand.ch;
    det.confidence = std::clamp(cand.score, 0.0, 1.0);
    det.centroid = {(cand.col + maps.mco.at(cand.row, cand.col, 0)) * s,
                    (cand.row + maps.mco.at(cand.row, cand.col, 1)) * s};
    for (int k = 0; k < 8; ++k) {
      det.vertices[k] = {maps.mv.at(cand.row, cand.col, 2 * k) * s,
                         maps.mv.at(cand.row, cand.col, 2 * k + 1) * s};
    }
    det.dim = {maps.ms.at(cand.row, cand.col, 0), maps.ms.at(cand.row, cand.col, 1),
               maps.ms.at(cand.row, cand.col, 2)};
    out.push_back(det);
  }
  return out;
}

Grid weighted_fuse(std::span<const Grid, 5> maps, const FusionWeights& weights) {
  weights.validate();
  for (std::size_t i = 1; i < maps.size(); ++i) {
    if (!maps[i].same_shape(maps[0])) {
      throw Error(ErrorCode::kShapeMismatch, "fusion inputs must share one shape", i);
    }
  }
  Grid out(maps[0].height(), maps[0].width(), maps[0].channels());
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const double wi = weights.w[i];
    const auto& src = maps[i].data();
    auto& dst = out.data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += wi * src[k];
  }
  return out;
}

Box3D localize(const Detection& det, const ProjectionMatrix& proj) {
  Box3D box;
  box.centroid = image_to_world(proj, det.centroid, det.dim.h / 2.0);
  box.dim = det.dim;
  box.class_id = det.class_id;
  return box;
}

}  // namespace roadloc
