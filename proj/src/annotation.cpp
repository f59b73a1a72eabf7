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

#include "roadloc/annotation.hpp"

namespace roadloc {

const char* class_name(int class_id) {
  switch (class_id) {
    case 0: return "car";
    case 1: return "truck";
    case 2: return "bus";
    default: return "unknown";
  }
}

int class_from_name(const std::string& name) {
  if (name == "car") return 0;
  if (name == "truck") return 1;
  if (name == "bus") return 2;
  return -1;
}

Annotation annotate_box(const Box3D& box, const ProjectionMatrix& proj) {
  Annotation ann;
  ann.class_id = box.class_id;
  ann.dim = box.dim;
  ann.centroid_xyz = box.centroid;
  ann.centroid_uv = world_to_image(proj, box.centroid);
  ann.vertices_uv = project_box(proj, gt_vertices(box));
  return ann;
}

}  // namespace roadloc
