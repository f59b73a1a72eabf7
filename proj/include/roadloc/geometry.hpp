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
#include <cmath>

namespace roadloc {

/// Point in the road (world) frame, meters. Origin at the camera foot,
/// +y along traffic flow, +z up.
struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const WorldPoint&, const WorldPoint&) = default;
};

/// Pixel coordinates, u right and v down, origin at the top-left corner.
struct ImagePoint {
  double u = 0.0;
  double v = 0.0;

  friend bool operator==(const ImagePoint&, const ImagePoint&) = default;
};

inline WorldPoint operator+(const WorldPoint& a, const WorldPoint& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
inline WorldPoint operator-(const WorldPoint& a, const WorldPoint& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
inline double norm(const WorldPoint& p) {
  return std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
}
inline double distance(const ImagePoint& a, const ImagePoint& b) {
  return std::hypot(a.u - b.u, a.v - b.v);
}

/// Vehicle length (along +y), width (along +x) and height (along +z), meters.
struct Dimension3D {
  double l = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const Dimension3D&, const Dimension3D&) = default;
};

/// Eight box corners: bottom ring P1..P4, then top ring P5..P8.
using VertexSet = std::array<WorldPoint, 8>;
using ImageOctet = std::array<ImagePoint, 8>;

}  // namespace roadloc
