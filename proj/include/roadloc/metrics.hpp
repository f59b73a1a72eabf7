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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roadloc/box3d.hpp"

namespace roadloc {

struct MatchConfig {
  double iou_threshold = 0.7;
  /// Only pair detections with ground truth of the same class.
  bool class_aware = true;

  void validate() const;
};

/// Effective field of view, meters along (d_ry) and across (d_rx) the road.
struct SceneExtent {
  double d_ry = 120.0;
  double d_rx = 25.0;

  void validate() const;
};

struct ScoredBox {
  Box3D box;
  double confidence = 0.0;
};

/// Ranked detections labeled TP/FP plus the recall denominator.
struct MatchResult {
  std::vector<double> scores;  // descending
  std::vector<bool> tp;        // parallel to scores
  std::vector<int> matched_gt;  // gt index per detection, -1 for FP
  std::size_t num_gt = 0;
};

/// Confidence-ordered greedy matching: each detection takes the unmatched
/// ground truth with the highest 3D IoU at or above the threshold.
MatchResult match_detections(std::span<const ScoredBox> dets, std::span<const Box3D> gts,
                             const MatchConfig& cfg);

/// Merges per-frame results into one ranking (stable by confidence).
MatchResult merge_matches(std::span<const MatchResult> frames);

/// 11-point interpolated AP. `tp` is in rank order. Throws kNoGroundTruth
/// when num_gt == 0.
double ap_11point(const std::vector<bool>& tp, std::size_t num_gt);

double fps(double seconds_per_frame);

double loc_precision(const WorldPoint& pred, const WorldPoint& gt, const SceneExtent& extent);
double loc_error(const WorldPoint& pred, const WorldPoint& gt);

double dim_precision(const Dimension3D& pred, const Dimension3D& gt);
double dim_error(const Dimension3D& pred, const Dimension3D& gt);

struct DistanceRecord {
  double distance = 0.0;
  double err_x = 0.0;
  double err_y = 0.0;
  double err_z = 0.0;
};

struct DistanceBin {
  double center = 0.0;
  std::size_t count = 0;
  double err_x = 0.0;
  double err_y = 0.0;
  double err_z = 0.0;
  double err_total = 0.0;  // mean of |dx| + |dy| + |dz|
};

/// Bins records by floor(distance / width); empty bins are omitted.
std::vector<DistanceBin> error_vs_distance(std::span<const DistanceRecord> records, double bin_width);

/// One frame of detections against ground truth.
struct FrameResult {
  std::string frame_id;
  std::vector<ScoredBox> detections;
  std::vector<Box3D> ground_truth;
  /// Scene field of view; EvalOptions::extent when absent.
  std::optional<SceneExtent> extent;
};

struct VehicleScore {
  std::string frame_id;
  int gt_index = 0;
  double loc_precision = 0.0;
  double loc_error = 0.0;
  double dim_precision = 0.0;
  double dim_error = 0.0;
  double distance = 0.0;
};

struct EvalReport {
  std::map<double, double> ap3d;  // threshold -> AP
  std::vector<VehicleScore> vehicles;
  double mean_loc_precision = 0.0;
  double mean_loc_error = 0.0;
  double mean_dim_precision = 0.0;
  double mean_dim_error = 0.0;
  std::vector<DistanceBin> error_curve;
  std::optional<double> fps;
};

struct EvalOptions {
  std::vector<double> thresholds{0.5, 0.7};
  bool class_aware = true;
  SceneExtent extent;
  double bin_width = 10.0;
  std::optional<double> seconds_per_frame;
};

/// AP3D at every threshold; per-vehicle localization and dimension scores
/// on the true positives of the loosest threshold.
EvalReport evaluate(std::span<const FrameResult> frames, const EvalOptions& options);

std::string report_to_json(const EvalReport& report);
/// Columns: bin_center_m, err_x, err_y, err_z, err_total.
std::string error_curve_csv(std::span<const DistanceBin> bins);

}  // namespace roadloc
