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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "roadloc/box3d.hpp"

namespace roadloc {

/// One labeled vehicle. Image coordinates are in the pixel frame of the
/// image the annotation belongs to; vertices follow the P1..P8 ordering.
struct Annotation {
  int class_id = 0;
  ImagePoint centroid_uv;
  ImageOctet vertices_uv;
  Dimension3D dim;
  std::optional<WorldPoint> centroid_xyz;
  /// Detector score; only meaningful for prediction files.
  std::optional<double> score;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct FrameAnnotations {
  std::string scene_id;
  std::string frame_id;
  std::int64_t revision = 0;
  /// Optional path to the frame raster, relative to the annotation file.
  std::string image;
  std::vector<Annotation> objects;

  friend bool operator==(const FrameAnnotations&, const FrameAnnotations&) = default;
};

const char* class_name(int class_id);
/// Returns -1 for unknown names.
int class_from_name(const std::string& name);

/// Builds the annotation for a world box: P1..P8 corners and the
/// centroid projected through `proj`.
Annotation annotate_box(const Box3D& box, const ProjectionMatrix& proj);

}  // namespace roadloc
