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

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "roadloc/box3d.hpp"
#include "roadloc/calib.hpp"
#include "roadloc/grid.hpp"
#include "roadloc/targets.hpp"

namespace roadloc {

struct LossWeights {
  double lambda_c = 1.0;
  double lambda_co = 1.0;
  double lambda_v = 0.1;
  double lambda_s = 0.1;
  double lambda_proj = 0.1;
  double lambda_iou = 1.0;

  void validate() const;
};

struct FocalParams {
  double alpha = 2.0;
  double beta = 4.0;
};

struct LossComponents {
  double focal = 0.0;
  double offset = 0.0;
  double vertex = 0.0;
  double dim = 0.0;
  double reprojection = 0.0;
  double iou = 0.0;
};

inline constexpr double kProbabilityClamp = 1e-7;

/// Penalty-reduced focal loss over the class heatmap, normalized by the
/// number of cells where gt == 1 (at least 1). `grad`, if given, is resized
/// to pred's shape and receives d(loss)/d(pred); clamped cells get 0.
double focal_loss(const Grid& pred, const Grid& gt, const FocalParams& params = {},
                  Grid* grad = nullptr);

/// Mean over peak cells of the L1 distance across all channels of `pred`
/// and `gt`. Returns 0 for an empty peak list. Used for the offset, vertex
/// and dimension terms.
double peak_l1_loss(const Grid& pred, const Grid& gt, std::span<const PeakTarget> peaks,
                    Grid* grad = nullptr);

double offset_loss(const Grid& pred_mco, const Grid& gt_mco, std::span<const PeakTarget> peaks,
                   Grid* grad = nullptr);
double vertex_loss(const Grid& pred_mv, const Grid& gt_mv, std::span<const PeakTarget> peaks,
                   Grid* grad = nullptr);
double dim_loss(const Grid& pred_ms, const Grid& gt_ms, std::span<const PeakTarget> peaks,
                Grid* grad = nullptr);

/// Per-object inputs of the reprojection constraint.
struct ReprojectionSample {
  WorldPoint anchor_p2;   // ground-truth P2 corner
  Dimension3D pred_dim;   // predicted (l, w, h)
  ImageOctet pred_vertices;  // predicted vertices, pixels
};

struct ReprojectionGradient {
  std::array<double, 3> d_dim{};  // d/d(l, w, h)
  std::array<double, 16> d_vertices{};  // d/d(u1, v1, ..., u8, v8)
};

/// Mean over samples of sum_i |project(proj_vertices(P2, dim))_i - pred_i|_1.
double reprojection_loss(const ProjectionMatrix& proj, std::span<const ReprojectionSample> samples,
                         std::vector<ReprojectionGradient>* grads = nullptr);

/// Grid form: reads dims from `pred_ms` and vertices from `pred_mv` (times the
/// stride) at every peak with an anchor. `proj` must map world points to the
/// same pixel frame as the vertex grid.
double reprojection_loss(const ProjectionMatrix& proj, const Grid& pred_ms, const Grid& pred_mv,
                         int stride, std::span<const PeakTarget> peaks,
                         Grid* grad_ms = nullptr, Grid* grad_mv = nullptr);

/// Mean over objects of ciou_loss(rect(pred octet), rect(gt octet)).
/// `grads`, if given, receives d/d(u1, v1, ..., u8, v8) of each pred octet.
double iou_constraint_loss(std::span<const ImageOctet> pred, std::span<const ImageOctet> gt,
                           std::vector<std::array<double, 16>>* grads = nullptr);

/// Grid form over the vertex maps (pixels = grid value times the stride).
double iou_constraint_loss(const Grid& pred_mv, const Grid& gt_mv, int stride,
                           std::span<const PeakTarget> peaks, Grid* grad = nullptr);

double total_loss(const LossComponents& c, const LossWeights& weights = {});

/// All six terms between predicted head outputs and encoded targets.
/// `proj` maps world points into the input-resolution pixel frame.
LossComponents evaluate_losses(const TargetMaps& pred, const TargetMaps& gt,
                               const ProjectionMatrix& proj, const FocalParams& focal = {});

/// Central differences of `loss` around `x`, one coordinate at a time.
std::vector<double> finite_difference_gradient(
    const std::function<double(std::span<const double>)>& loss, std::span<const double> x,
    double epsilon);

Grid finite_difference_gradient(const std::function<double(const Grid&)>& loss, const Grid& x,
                                double epsilon);

}  // namespace roadloc
