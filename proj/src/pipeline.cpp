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

#include "roadloc/pipeline.hpp"

#include <limits>
#include <sstream>

#include "roadloc/error.hpp"
#include "roadloc/fileio.hpp"

namespace roadloc {

InputMapping input_mapping(const SceneMeta& scene, const GridConfig& cfg) {
  InputMapping m;
  m.sx = static_cast<double>(cfg.input_width) / scene.image_width;
  m.sy = static_cast<double>(cfg.input_height) / scene.image_height;
  m.input_projection = scale_projection(scene.projection(), m.sx, m.sy);
  return m;
}

TargetMaps encode_frame(const SceneMeta& scene, const FrameAnnotations& frame, const GridConfig& cfg) {
  const InputMapping m = input_mapping(scene, cfg);
  const auto resized = resize_annotations(frame.objects, m.sx, m.sy);
  return encode(resized, cfg);
}

FrameAnnotations detections_to_frame(const std::vector<Detection>& dets, const SceneMeta& scene,
                                     const GridConfig& cfg, const std::string& frame_id) {
  const InputMapping m = input_mapping(scene, cfg);
  FrameAnnotations out;
  out.scene_id = scene.id;
  out.frame_id = frame_id;
  for (const auto& det : dets) {
    Annotation a;
    a.class_id = det.class_id;
    a.dim = det.dim;
    a.score = det.confidence;
    a.centroid_uv = {det.centroid.u / m.sx, det.centroid.v / m.sy};
    for (int k = 0; k < 8; ++k) a.vertices_uv[k] = {det.vertices[k].u / m.sx, det.vertices[k].v / m.sy};
    try {
      a.centroid_xyz = localize(det, m.input_projection).centroid;
    } catch (const Error&) {
      // Above the horizon: keep the detection, without a world position.
    }
    out.objects.push_back(a);
  }
  return out;
}

FrameResult to_frame_result(const FrameAnnotations& gt, const FrameAnnotations& pred, const SceneMeta& scene) {
  const ProjectionMatrix proj = scene.projection();
  FrameResult fr;
  fr.frame_id = gt.frame_id;
  for (std::size_t i = 0; i < gt.objects.size(); ++i) {
    const auto& a = gt.objects[i];
    Box3D box;
    box.class_id = a.class_id;
    box.dim = a.dim;
    box.centroid = a.centroid_xyz ? *a.centroid_xyz : image_to_world(proj, a.centroid_uv, a.dim.h / 2.0);
    fr.ground_truth.push_back(box);
  }
  for (const auto& a : pred.objects) {
    ScoredBox sb;
    sb.confidence = a.score.value_or(1.0);
    sb.box.class_id = a.class_id;
    sb.box.dim = a.dim;
    if (a.centroid_xyz) {
      sb.box.centroid = *a.centroid_xyz;
    } else {
      try {
        sb.box.centroid = image_to_world(proj, a.centroid_uv, a.dim.h / 2.0);
      } catch (const Error&) {
        // Cannot be placed in the world: kept so it counts as a false positive.
        const double nan = std::numeric_limits<double>::quiet_NaN();
        sb.box.centroid = {nan, nan, nan};
      }
    }
    fr.detections.push_back(sb);
  }
  fr.extent = scene.extent;
  return fr;
}

std::vector<EvalPair> load_eval_manifest(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& s) {
    std::filesystem::path p = s;
    return p.is_absolute() ? p : base / p;
  };
  std::vector<EvalPair> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string gt, pred, extra;
    if (!(fields >> gt) || gt[0] == '#') continue;
    if (!(fields >> pred) || (fields >> extra)) {
      throw Error(ErrorCode::kParseError,
                  path.string() + ":" + std::to_string(line_no) + ": expected \"<gt> <prediction>\"");
    }
    out.push_back({resolve(gt), resolve(pred)});
  }
  return out;
}

EvalReport evaluate_manifest(const std::filesystem::path& manifest, const SceneLookup& scenes,
                             const EvalOptions& options, const ProgressFn& progress) {
  const auto pairs = load_eval_manifest(manifest);
  std::vector<FrameResult> frames;
  frames.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const FrameAnnotations gt = load_annotations(pairs[i].gt);
    const FrameAnnotations pred = load_annotations(pairs[i].pred);
    const SceneMeta* scene = scenes(gt.scene_id);
    if (scene == nullptr) {
      throw Error(ErrorCode::kInvalidArgument, pairs[i].gt.string() + ": unknown scene '" + gt.scene_id + "'");
    }
    frames.push_back(to_frame_result(gt, pred, *scene));
    if (progress) progress(i + 1, pairs.size());
  }
  return evaluate(frames, options);
}

}  // namespace roadloc
