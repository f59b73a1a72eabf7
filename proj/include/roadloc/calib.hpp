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

#include <Eigen/Core>

#include <span>
#include <utility>

#include "roadloc/geometry.hpp"

namespace roadloc {

using Mat3 = Eigen::Matrix3d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

/// Roadside pinhole camera with zero roll. Angles in radians, height in
/// meters, focal length and principal point in pixels.
struct CalibrationParams {
  double f = 1.0;
  double phi = 0.1;    // tilt, positive looking down
  double theta = 0.0;  // pan about the world z axis
  double h = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  /// Throws kInvalidArgument unless f > 0, h > 0, 0 < phi < pi/2, |theta| < pi/2.
  void validate() const;

  friend bool operator==(const CalibrationParams&, const CalibrationParams&) = default;
};

/// Image of the point at infinity along the road direction (+y).
struct VanishingPoint {
  double u0 = 0.0;
  double v0 = 0.0;
};

/// 3x4 world-to-image map. Applying it to homogeneous (x, y, z, 1) yields
/// s * (u, v, 1).
struct ProjectionMatrix {
  Mat34 m = Mat34::Zero();

  double operator()(int i, int j) const { return m(i, j); }
};

enum class MarkKind { kAlongRoad, kAcrossRoad };

/// A painted road mark with known real-world length, observed as a segment
/// on the ground plane.
struct GroundMark {
  ImagePoint a;
  ImagePoint b;
  double world_length = 0.0;
  MarkKind kind = MarkKind::kAlongRoad;
};

inline constexpr double kDegeneracyTolerance = 1e-12;

Mat3 build_intrinsics(const CalibrationParams& params);

/// R = Rx(phi + pi/2) * Rz(theta), written out entry by entry.
Mat3 build_rotation(double phi, double theta);

/// H = K * R * T where T translates world z by -h.
ProjectionMatrix build_projection(const CalibrationParams& params);

/// Left-multiplies H by diag(sx, sy, 1), e.g. to map native pixels onto a
/// resized network input.
ProjectionMatrix scale_projection(const ProjectionMatrix& proj, double sx, double sy);

/// Throws kDegenerateProjection when the homogeneous denominator vanishes.
ImagePoint world_to_image(const ProjectionMatrix& proj, const WorldPoint& p);

/// Intersects the viewing ray of `q` with the plane at height `z`. Throws
/// kDegenerateBackprojection when the ray is parallel to that plane.
WorldPoint image_to_world(const ProjectionMatrix& proj, const ImagePoint& q, double z);

VanishingPoint vp_from_params(const CalibrationParams& params);

/// Inverse of vp_from_params for a known focal length: returns (phi, theta).
std::pair<double, double> angles_from_vp(const VanishingPoint& vp, double f, double cx,
                                         double cy);

/// Calibration of the horizontally mirrored image (u -> width - 1 - u).
/// Its projection equals F * H * diag(-1, 1, 1, 1) with F = mirror_u_matrix,
/// i.e. the mirrored camera also sees the world mirrored in x.
CalibrationParams mirror_params(const CalibrationParams& params, int image_width);

/// F: u -> width - 1 - u as a 3x3 image homography.
Mat3 mirror_u_matrix(int image_width);

struct VwlOptions {
  int grid_points = 200;
  double f_min_factor = 0.2;   // times image width
  double f_max_factor = 10.0;  // times image width
  int golden_iterations = 200;
  /// Largest accepted RMS relative mark-length error.
  double tolerance = 0.05;
};

struct VwlSolution {
  CalibrationParams params;
  double residual = 0.0;  // RMS relative length error over all marks
};

/// Single-vanishing-point calibration from known-length ground marks.
/// Needs at least one along-road and one across-road mark.
VwlSolution solve_vwl(const VanishingPoint& vp, std::span<const GroundMark> marks,
                      int image_width, int image_height, const VwlOptions& options = {});

}  // namespace roadloc
