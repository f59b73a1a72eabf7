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

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "roadloc/dataio.hpp"
#include "roadloc/metrics.hpp"
#include "roadloc/targets.hpp"

namespace roadloc {

/// Native-image to network-input mapping for one scene.
struct InputMapping {
  double sx = 1.0;
  double sy = 1.0;
  ProjectionMatrix input_projection;  // world -> input pixels
};

InputMapping input_mapping(const SceneMeta& scene, const GridConfig& cfg);

/// Resizes the frame's annotations to the input resolution and encodes them.
TargetMaps encode_frame(const SceneMeta& scene, const FrameAnnotations& frame, const GridConfig& cfg);

/// Decoded detections (input pixels) to a prediction frame in native pixels,
/// with world centroids backprojected at half height and scores attached.
FrameAnnotations detections_to_frame(const std::vector<Detection>& dets, const SceneMeta& scene,
                                     const GridConfig& cfg, const std::string& frame_id);

/// Ground-truth and prediction frames to world boxes. Predictions without a
/// world centroid are backprojected at half height through the scene.
FrameResult to_frame_result(const FrameAnnotations& gt, const FrameAnnotations& pred, const SceneMeta& scene);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;
using SceneLookup = std::function<const SceneMeta*(const std::string& scene_id)>;

/// One evaluation entry: ground-truth frame and prediction frame.
struct EvalPair {
  std::filesystem::path gt;
  std::filesystem::path pred;
};

/// Lines of "<gt.json> <pred.json>", relative to the manifest directory.
std::vector<EvalPair> load_eval_manifest(const std::filesystem::path& path);

/// Loads every pair, resolves its scene through `scenes` (kInvalidArgument
/// for unknown ids) and evaluates with each scene's own field of view.
EvalReport evaluate_manifest(const std::filesystem::path& manifest, const SceneLookup& scenes,
                             const EvalOptions& options, const ProgressFn& progress = {});

}  // namespace roadloc
