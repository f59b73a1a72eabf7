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
#include <span>

#include "roadloc/calib.hpp"
#include "roadloc/geometry.hpp"

namespace roadloc {

enum class VehicleClass : int { kCar = 0, kTruck = 1, kBus = 2 };

inline constexpr int kNumVehicleClasses = 3;

/// Axis-aligned box in the road frame. Vehicles are assumed to travel
/// parallel to the road axis, so no yaw is carried.
struct Box3D {
  WorldPoint centroid;
  Dimension3D dim;
  int class_id = 0;
};

struct Rect2D {
  double min_u = 0.0;
  double min_v = 0.0;
  double max_u = 0.0;
  double max_v = 0.0;

  double width() const { return max_u - min_u; }
  double height() const { return max_v - min_v; }
  double area() const { return width() * height(); }
  ImagePoint center() const { return {(min_u + max_u) / 2.0, (min_v + max_v) / 2.0}; }

  friend bool operator==(const Rect2D&, const Rect2D&) = default;
};

/// d(loss)/d(min_u, min_v, max_u, max_v).
using RectGradient = std::array<double, 4>;

/// Throws kInvalidArgument for non-finite or negative dimensions.
void validate_dimension(const Dimension3D& dim);

/// Corners from the centroid and half-dimensions.
///   P1 (+w, -l, -h)  P2 (-w, -l, -h)  P3 (-w, +l, -h)  P4 (+w, +l, -h)
///   P5..P8: P1..P4 with +h.
VertexSet gt_vertices(const Box3D& box);

/// Corners rebuilt from the P2 anchor and a (possibly predicted) dimension.
/// Equals gt_vertices when the dimension matches the one that produced P2.
VertexSet proj_vertices(const WorldPoint& p2, const Dimension3D& dim);

/// Applies world_to_image per vertex; a degenerate vertex is reported with
/// its 0-based index.
ImageOctet project_box(const ProjectionMatrix& proj, const VertexSet& vertices);

/// Throws kEmptyInput on an empty span.
Rect2D min_external_rect(std::span<const ImagePoint> points);

/// Volume IoU of two axis-aligned boxes; 0 when the union has no volume.
double iou3d(const Box3D& a, const Box3D& b);

double iou2d(const Rect2D& a, const Rect2D& b);

/// Complete-IoU loss 1 - IoU + rho^2 / c^2 + alpha * v. When `grad` is given,
/// receives the exact derivative with respect to `pred` (alpha is
/// differentiated too). Throws kDegenerateRect when the enclosing box has a
/// zero diagonal.
double ciou_loss(const Rect2D& pred, const Rect2D& gt, RectGradient* grad = nullptr);

}  // namespace roadloc
