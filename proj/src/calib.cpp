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

#include "roadloc/calib.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "roadloc/error.hpp"

namespace roadloc {

void CalibrationParams::validate() const {
  auto fail = [](const char* what) { throw Error(ErrorCode::kInvalidArgument, what); };
  if (!(std::isfinite(f) && f > 0.0)) fail("calibration: f must be > 0");
  if (!(std::isfinite(h) && h > 0.0)) fail("calibration: h must be > 0");
  if (!(phi > 0.0 && phi < std::numbers::pi / 2)) fail("calibration: phi must lie in (0, pi/2)");
  if (!(std::abs(theta) < std::numbers::pi / 2)) fail("calibration: |theta| must be < pi/2");
  if (!std::isfinite(cx) || !std::isfinite(cy)) fail("calibration: principal point not finite");
}

Mat3 build_intrinsics(const CalibrationParams& params) {
  Mat3 k;
  k << params.f, 0.0, params.cx,
       0.0, params.f, params.cy,
       0.0, 0.0, 1.0;
  return k;
}

Mat3 build_rotation(double phi, double theta) {
  const double sp = std::sin(phi), cp = std::cos(phi);
  const double st = std::sin(theta), ct = std::cos(theta);
  Mat3 r;
  r << ct, -st, 0.0,
       -sp * st, -sp * ct, -cp,
       cp * st, cp * ct, -sp;
  return r;
}

ProjectionMatrix build_projection(const CalibrationParams& params) {
  Mat34 t = Mat34::Zero();
  t.leftCols<3>().setIdentity();
  t(2, 3) = -params.h;
  return {build_intrinsics(params) * build_rotation(params.phi, params.theta) * t};
}

ProjectionMatrix scale_projection(const ProjectionMatrix& proj, double sx, double sy) {
  ProjectionMatrix out = proj;
  out.m.row(0) *= sx;
  out.m.row(1) *= sy;
  return out;
}

ImagePoint world_to_image(const ProjectionMatrix& proj, const WorldPoint& p) {
  const auto& h = proj.m;
  const double den = h(2, 0) * p.x + h(2, 1) * p.y + h(2, 2) * p.z + h(2, 3);
  if (!(std::abs(den) >= kDegeneracyTolerance)) {
    throw Error(ErrorCode::kDegenerateProjection, "world point lies on the camera plane");
  }
  return {(h(0, 0) * p.x + h(0, 1) * p.y + h(0, 2) * p.z + h(0, 3)) / den,
          (h(1, 0) * p.x + h(1, 1) * p.y + h(1, 2) * p.z + h(1, 3)) / den};
}

WorldPoint image_to_world(const ProjectionMatrix& proj, const ImagePoint& q, double z) {
  const auto& h = proj.m;
  const double u = q.u, v = q.v;
  const double b1 = u * (h(2, 2) * z + h(2, 3)) - (h(0, 2) * z + h(0, 3));
  const double b2 = v * (h(2, 2) * z + h(2, 3)) - (h(1, 2) * z + h(1, 3));
  const double a11 = h(0, 0) - h(2, 0) * u, a12 = h(0, 1) - h(2, 1) * u;
  const double a21 = h(1, 0) - h(2, 0) * v, a22 = h(1, 1) - h(2, 1) * v;
  const double det = a11 * a22 - a12 * a21;
  // Relative to the magnitude of the cancelling terms, so resized
  // projections behave alike and the horizon row is caught.
  const double row1 = std::abs(h(0, 0)) + std::abs(h(2, 0) * u) + std::abs(h(0, 1)) + std::abs(h(2, 1) * u);
  const double row2 = std::abs(h(1, 0)) + std::abs(h(2, 0) * v) + std::abs(h(1, 1)) + std::abs(h(2, 1) * v);
  const double scale = row1 * row2;
  if (!(std::abs(det) >= kDegeneracyTolerance * scale)) {
    throw Error(ErrorCode::kDegenerateBackprojection,
                "viewing ray is parallel to the requested height plane");
  }
  return {(b1 * a22 - b2 * a12) / det, (-b1 * a21 + b2 * a11) / det, z};
}

VanishingPoint vp_from_params(const CalibrationParams& params) {
  const double cp = std::cos(params.phi), ct = std::cos(params.theta);
  if (std::abs(cp * ct) < kDegeneracyTolerance) {
    throw Error(ErrorCode::kDegenerateProjection, "road direction is parallel to the image plane");
  }
  return {params.cx - params.f * std::tan(params.theta) / cp,
          params.cy - params.f * std::tan(params.phi)};
}

std::pair<double, double> angles_from_vp(const VanishingPoint& vp, double f, double cx,
                                         double cy) {
  const double phi = std::atan((cy - vp.v0) / f);
  const double theta = std::atan((cx - vp.u0) * std::cos(phi) / f);
  return {phi, theta};
}

CalibrationParams mirror_params(const CalibrationParams& params, int image_width) {
  CalibrationParams out = params;
  out.theta = -params.theta;
  out.cx = static_cast<double>(image_width - 1) - params.cx;
  return out;
}

Mat3 mirror_u_matrix(int image_width) {
  Mat3 f;
  f << -1.0, 0.0, static_cast<double>(image_width - 1),
       0.0, 1.0, 0.0,
       0.0, 0.0, 1.0;
  return f;
}

namespace {

struct VwlCandidate {
  CalibrationParams params;
  double score = std::numeric_limits<double>::infinity();
};

double ground_length(const ProjectionMatrix& proj, const GroundMark& mark) {
  const WorldPoint a = image_to_world(proj, mark.a, 0.0);
  const WorldPoint b = image_to_world(proj, mark.b, 0.0);
  return norm(a - b);
}

// Fixes angles from the VP, height from the along-road marks, and scores the
// squared relative length error of every mark.
VwlCandidate evaluate_focal(double f, const VanishingPoint& vp, double cx, double cy,
                            std::span<const GroundMark> marks) {
  VwlCandidate cand;
  const auto [phi, theta] = angles_from_vp(vp, f, cx, cy);
  if (!(phi > 0.0 && phi < std::numbers::pi / 2)) return cand;
  CalibrationParams unit{f, phi, theta, 1.0, cx, cy};
  const ProjectionMatrix proj = build_projection(unit);

  std::vector<double> unit_lengths;
  unit_lengths.reserve(marks.size());
  try {
    for (const auto& mark : marks) unit_lengths.push_back(ground_length(proj, mark));
  } catch (const Error&) {
    return cand;
  }

  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < marks.size(); ++i) {
    if (marks[i].kind != MarkKind::kAlongRoad) continue;
    const double r = unit_lengths[i] / marks[i].world_length;
    num += r;
    den += r * r;
  }
  if (!(den > 0.0)) return cand;
  unit.h = num / den;

  double sq = 0.0;
  for (std::size_t i = 0; i < marks.size(); ++i) {
    const double rel = (unit.h * unit_lengths[i] - marks[i].world_length) / marks[i].world_length;
    sq += rel * rel;
  }
  cand.params = unit;
  cand.score = sq / static_cast<double>(marks.size());
  return cand;
}

}  // namespace

VwlSolution solve_vwl(const VanishingPoint& vp, std::span<const GroundMark> marks,
                      int image_width, int image_height, const VwlOptions& options) {
  if (!std::isfinite(vp.u0) || !std::isfinite(vp.v0)) {
    throw Error(ErrorCode::kInvalidArgument, "vanishing point is not finite");
  }
  if (image_width <= 0 || image_height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "image size must be positive");
  }
  const bool has_along = std::any_of(marks.begin(), marks.end(), [](const GroundMark& m) {
    return m.kind == MarkKind::kAlongRoad;
  });
  const bool has_across = std::any_of(marks.begin(), marks.end(), [](const GroundMark& m) {
    return m.kind == MarkKind::kAcrossRoad;
  });
  if (!has_along || !has_across) {
    throw Error(ErrorCode::kInsufficientMarks,
                "need at least one along-road and one across-road mark");
  }
  for (std::size_t i = 0; i < marks.size(); ++i) {
    if (!(marks[i].world_length > 0.0) || marks[i].a == marks[i].b) {
      throw Error(ErrorCode::kInvalidArgument, "ground mark needs distinct endpoints and positive length", i);
    }
  }

  const double cx = image_width / 2.0, cy = image_height / 2.0;
  const double log_lo = std::log(options.f_min_factor * image_width);
  const double log_hi = std::log(options.f_max_factor * image_width);
  const int n = std::max(options.grid_points, 3);

  std::vector<double> scores(n);
  int best = -1;
  for (int i = 0; i < n; ++i) {
    const double lf = log_lo + (log_hi - log_lo) * i / (n - 1);
    scores[i] = evaluate_focal(std::exp(lf), vp, cx, cy, marks).score;
    if (best < 0 || scores[i] < scores[best]) best = i;
  }
  if (!std::isfinite(scores[best])) {
    throw Error(ErrorCode::kNoConvergence, "no focal length in the search range yields a valid camera");
  }

  // Golden-section refinement on log f over the bracketing grid cells.
  const double step = (log_hi - log_lo) / (n - 1);
  double a = log_lo + step * std::max(best - 1, 0);
  double b = log_lo + step * std::min(best + 1, n - 1);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto score_at = [&](double lf) { return evaluate_focal(std::exp(lf), vp, cx, cy, marks).score; };
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = score_at(c), fd = score_at(d);
  for (int it = 0; it < options.golden_iterations && (b - a) > 1e-14; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = score_at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = score_at(d);
    }
  }

  VwlCandidate refined = evaluate_focal(std::exp((a + b) / 2.0), vp, cx, cy, marks);
  const double grid_f = std::exp(log_lo + step * best);
  VwlCandidate grid = evaluate_focal(grid_f, vp, cx, cy, marks);
  if (!(refined.score <= grid.score)) refined = grid;

  VwlSolution sol{refined.params, std::sqrt(refined.score)};
  if (!(sol.residual <= options.tolerance)) {
    throw Error(ErrorCode::kNoConvergence, "calibration residual " + std::to_string(sol.residual) +
                                               " exceeds tolerance");
  }
  return sol;
}

}  // namespace roadloc
