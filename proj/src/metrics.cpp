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

#include "roadloc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "roadloc/error.hpp"

namespace roadloc {

void MatchConfig::validate() const {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "IoU threshold must lie in (0, 1]");
  }
}

void SceneExtent::validate() const {
  if (!(d_ry > 0.0 && d_rx > 0.0)) throw Error(ErrorCode::kInvalidArgument, "scene extent must be positive");
}

MatchResult match_detections(std::span<const ScoredBox> dets, std::span<const Box3D> gts,
                             const MatchConfig& cfg) {
  cfg.validate();
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].confidence > dets[b].confidence;
  });

  MatchResult res;
  res.num_gt = gts.size();
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t di : order) {
    const auto& det = dets[di];
    int best = -1;
    double best_iou = cfg.iou_threshold;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      if (cfg.class_aware && gts[g].class_id != det.box.class_id) continue;
      const double iou = iou3d(det.box, gts[g]);
      if (iou >= best_iou && (best < 0 || iou > best_iou)) {
        best = static_cast<int>(g);
        best_iou = iou;
      }
    }
    if (best >= 0) taken[best] = true;
    res.scores.push_back(det.confidence);
    res.tp.push_back(best >= 0);
    res.matched_gt.push_back(best);
  }
  return res;
}

MatchResult merge_matches(std::span<const MatchResult> frames) {
  struct Item {
    double score;
    bool tp;
    int gt;
  };
  std::vector<Item> items;
  MatchResult out;
  for (const auto& f : frames) {
    out.num_gt += f.num_gt;
    for (std::size_t i = 0; i < f.scores.size(); ++i) items.push_back({f.scores[i], f.tp[i], f.matched_gt[i]});
  }
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.score > b.score; });
  for (const auto& it : items) {
    out.scores.push_back(it.score);
    out.tp.push_back(it.tp);
    out.matched_gt.push_back(it.gt);
  }
  return out;
}

double ap_11point(const std::vector<bool>& tp, std::size_t num_gt) {
  if (num_gt == 0) throw Error(ErrorCode::kNoGroundTruth, "AP needs at least one ground-truth object");
  const std::size_t n = tp.size();
  std::vector<double> precision(n), recall(n);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    hits += tp[i];
    precision[i] = static_cast<double>(hits) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(hits) / static_cast<double>(num_gt);
  }
  // Precision envelope: best precision at this rank or any deeper one.
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double sum = 0.0;
  std::size_t rank = 0;
  for (int k = 0; k <= 10; ++k) {
    const double r = k / 10.0;
    while (rank < n && recall[rank] < r) ++rank;
    if (rank < n) sum += precision[rank];
  }
  return sum / 11.0;
}

double fps(double seconds_per_frame) {
  if (!(seconds_per_frame > 0.0)) throw Error(ErrorCode::kNonpositiveTime, "processing time must be positive");
  return 1.0 / seconds_per_frame;
}

double loc_precision(const WorldPoint& pred, const WorldPoint& gt, const SceneExtent& extent) {
  extent.validate();
  return 1.0 - (std::abs(pred.x - gt.x) / (extent.d_rx / 2.0) + std::abs(pred.y - gt.y) / (extent.d_ry / 2.0));
}

double loc_error(const WorldPoint& pred, const WorldPoint& gt) {
  return std::abs(pred.x - gt.x) + std::abs(pred.y - gt.y);
}

double dim_precision(const Dimension3D& pred, const Dimension3D& gt) {
  if (!(gt.l > 0.0 && gt.w > 0.0 && gt.h > 0.0)) {
    throw Error(ErrorCode::kNonpositiveGt, "ground-truth dimensions must be positive");
  }
  return 1.0 - (std::abs(pred.l - gt.l) / gt.l + std::abs(pred.w - gt.w) / gt.w + std::abs(pred.h - gt.h) / gt.h);
}

double dim_error(const Dimension3D& pred, const Dimension3D& gt) {
  return std::abs(pred.l - gt.l) + std::abs(pred.w - gt.w) + std::abs(pred.h - gt.h);
}

std::vector<DistanceBin> error_vs_distance(std::span<const DistanceRecord> records, double bin_width) {
  if (!(bin_width > 0.0)) throw Error(ErrorCode::kInvalidArgument, "bin width must be positive");
  std::map<long long, DistanceBin> bins;
  for (const auto& r : records) {
    const auto idx = static_cast<long long>(std::floor(r.distance / bin_width));
    auto& b = bins[idx];
    b.center = (static_cast<double>(idx) + 0.5) * bin_width;
    ++b.count;
    b.err_x += std::abs(r.err_x);
    b.err_y += std::abs(r.err_y);
    b.err_z += std::abs(r.err_z);
    b.err_total += std::abs(r.err_x) + std::abs(r.err_y) + std::abs(r.err_z);
  }
  std::vector<DistanceBin> out;
  for (auto& [idx, b] : bins) {
    const double n = static_cast<double>(b.count);
    b.err_x /= n;
    b.err_y /= n;
    b.err_z /= n;
    b.err_total /= n;
    out.push_back(b);
  }
  return out;
}

EvalReport evaluate(std::span<const FrameResult> frames, const EvalOptions& options) {
  if (options.thresholds.empty()) throw Error(ErrorCode::kInvalidArgument, "at least one IoU threshold is required");
  options.extent.validate();
  EvalReport report;

  const double loosest = *std::min_element(options.thresholds.begin(), options.thresholds.end());
  for (double thr : options.thresholds) {
    MatchConfig cfg{thr, options.class_aware};
    std::vector<MatchResult> per_frame;
    per_frame.reserve(frames.size());
    for (const auto& f : frames) per_frame.push_back(match_detections(f.detections, f.ground_truth, cfg));
    const MatchResult merged = merge_matches(per_frame);
    report.ap3d[thr] = merged.num_gt > 0 ? ap_11point(merged.tp, merged.num_gt) : 0.0;

    if (thr != loosest) continue;
    std::vector<DistanceRecord> records;
    for (std::size_t fi = 0; fi < frames.size(); ++fi) {
      const auto& f = frames[fi];
      const auto& m = per_frame[fi];
      // match_detections ranks by confidence; recover the source detection.
      std::vector<std::size_t> order(f.detections.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return f.detections[a].confidence > f.detections[b].confidence;
      });
      for (std::size_t k = 0; k < order.size(); ++k) {
        if (!m.tp[k]) continue;
        const auto& det = f.detections[order[k]].box;
        const auto& gt = f.ground_truth[static_cast<std::size_t>(m.matched_gt[k])];
        VehicleScore vs;
        vs.frame_id = f.frame_id;
        vs.gt_index = m.matched_gt[k];
        vs.loc_precision = loc_precision(det.centroid, gt.centroid, f.extent.value_or(options.extent));
        vs.loc_error = loc_error(det.centroid, gt.centroid);
        vs.dim_precision = dim_precision(det.dim, gt.dim);
        vs.dim_error = dim_error(det.dim, gt.dim);
        vs.distance = std::hypot(gt.centroid.x, gt.centroid.y);
        report.vehicles.push_back(vs);
        records.push_back({vs.distance, det.centroid.x - gt.centroid.x, det.centroid.y - gt.centroid.y,
                           det.centroid.z - gt.centroid.z});
      }
    }
    report.error_curve = error_vs_distance(records, options.bin_width);
  }

  if (!report.vehicles.empty()) {
    const double n = static_cast<double>(report.vehicles.size());
    for (const auto& v : report.vehicles) {
      report.mean_loc_precision += v.loc_precision / n;
      report.mean_loc_error += v.loc_error / n;
      report.mean_dim_precision += v.dim_precision / n;
      report.mean_dim_error += v.dim_error / n;
    }
  }
  if (options.seconds_per_frame) report.fps = fps(*options.seconds_per_frame);
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["ap3d"] = nlohmann::json::array();
  for (const auto& [thr, ap] : report.ap3d) j["ap3d"].push_back({{"iou_threshold", thr}, {"ap", ap}});
  j["mean_loc_precision"] = report.mean_loc_precision;
  j["mean_loc_error"] = report.mean_loc_error;
  j["mean_dim_precision"] = report.mean_dim_precision;
  j["mean_dim_error"] = report.mean_dim_error;
  j["fps"] = report.fps ? nlohmann::json(*report.fps) : nlohmann::json(nullptr);
  j["vehicles"] = nlohmann::json::array();
  for (const auto& v : report.vehicles) {
    j["vehicles"].push_back({{"frame_id", v.frame_id},
                             {"gt_index", v.gt_index},
                             {"loc_precision", v.loc_precision},
                             {"loc_error", v.loc_error},
                             {"dim_precision", v.dim_precision},
                             {"dim_error", v.dim_error},
                             {"distance", v.distance}});
  }
  j["error_curve"] = nlohmann::json::array();
  for (const auto& b : report.error_curve) {
    j["error_curve"].push_back({{"bin_center_m", b.center},
                                {"count", b.count},
                                {"err_x", b.err_x},
                                {"err_y", b.err_y},
                                {"err_z", b.err_z},
                                {"err_total", b.err_total}});
  }
  return j.dump(2);
}

std::string error_curve_csv(std::span<const DistanceBin> bins) {
  std::ostringstream out;
  out.precision(10);
  out << "bin_center_m,err_x,err_y,err_z,err_total\n";
  for (const auto& b : bins) {
    out << b.center << ',' << b.err_x << ',' << b.err_y << ',' << b.err_z << ',' << b.err_total << '\n';
  }
  return out.str();
}

}  // namespace roadloc
