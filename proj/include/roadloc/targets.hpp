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

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "roadloc/box3d.hpp"
#include "roadloc/grid.hpp"

namespace roadloc {

struct Annotation;

struct GridConfig {
  int input_width = 512;
  int input_height = 512;
  int stride = 4;
  int num_classes = kNumVehicleClasses;

  int grid_width() const { return input_width / stride; }
  int grid_height() const { return input_height / stride; }
};

/// A cell holding an object's regression targets.
struct PeakTarget {
  int row = 0;
  int col = 0;
  int class_id = 0;
  /// Ground-truth P2 corner in the world frame, when the annotation has a
  /// world centroid. Anchors the reprojection constraint.
  std::optional<WorldPoint> anchor_p2;
};

/// Head targets (or head outputs) on the stride-S grid.
///   mc  : C channels, centroid heatmap in [0, 1]
///   mco : 2 channels, sub-cell centroid offset (du, dv) in [0, 1)
///   mv  : 16 channels, vertices (u1, v1, ..., u8, v8) divided by S
///   ms  : 3 channels, (l, w, h) in meters
struct TargetMaps {
  Grid mc;
  Grid mco;
  Grid mv;
  Grid ms;
  int stride = 4;
  int num_classes = kNumVehicleClasses;
  std::vector<PeakTarget> peaks;
  int collisions = 0;

  static TargetMaps zeros(const GridConfig& cfg);
  void check_shapes() const;
};

struct Detection {
  int class_id = 0;
  double confidence = 0.0;
  ImagePoint centroid;
  ImageOctet vertices;
  Dimension3D dim;
};

struct DecodeOptions {
  int max_objects = 100;
  double threshold = 0.3;
};

struct FusionWeights {
  std::array<double, 5> w{0.5, 0.2, 0.1, 0.1, 0.1};

  void validate() const;
};

/// Gaussian radius rule: the largest corner displacement r (in cells) that
/// keeps IoU >= min_overlap with a w x h box, minimized over the shrink,
/// grow and shift cases.
double gaussian_radius(double w_cells, double h_cells, double min_overlap = 0.7);

/// sigma = radius / 3, floored at 2/3 cell.
double gaussian_sigma(double w_cells, double h_cells);

/// Renders annotations (already at input resolution) into targets. The
/// heatmap is the cellwise max of per-object Gaussians; each object's own
/// cell holds exactly 1. Throws kOutOfBounds for centroids off the input.
TargetMaps encode(std::span<const Annotation> annotations, const GridConfig& cfg);

/// Extracts 3x3 local maxima of mc at or above the threshold, strongest
/// first, and reads the regression channels at each peak.
std::vector<Detection> decode(const TargetMaps& maps, const DecodeOptions& options = {});

/// sum_i w_i * maps[i]. Throws kShapeMismatch if shapes differ.
Grid weighted_fuse(std::span<const Grid, 5> maps, const FusionWeights& weights);

/// Backprojects a detection's centroid at z = h / 2 into a world box.
Box3D localize(const Detection& det, const ProjectionMatrix& proj);

}  // namespace roadloc
