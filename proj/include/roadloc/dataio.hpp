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
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "roadloc/annotation.hpp"
#include "roadloc/calib.hpp"
#include "roadloc/metrics.hpp"

namespace roadloc {

inline constexpr int kSchemaVersion = 1;

/// A camera installation: calibration, field of view and native resolution.
struct SceneMeta {
  std::string id;
  CalibrationParams params;
  SceneExtent extent;
  int image_width = 1920;
  int image_height = 1080;

  ProjectionMatrix projection() const { return build_projection(params); }
};

// Scene calibration JSON: {scene_id, f, phi, theta, h, h_unit: "mm" | "m",
// cx, cy, image_width, image_height, D_ry, D_rx}. Heights are stored in
// meters internally.
SceneMeta scene_from_json(const std::string& text, const std::string& origin = "<memory>");
std::string scene_to_json(const SceneMeta& scene);
SceneMeta load_scene(const std::filesystem::path& path);
void save_scene(const std::filesystem::path& path, const SceneMeta& scene);

// Frame annotation JSON: {schema_version, scene_id, frame_id, revision,
// image?, objects: [{class, centroid_uv, vertices_uv[8], dim_lwh,
// centroid_xyz?, score?}]}.
FrameAnnotations frame_from_json(const std::string& text, const std::string& origin = "<memory>");
std::string frame_to_json(const FrameAnnotations& frame);
FrameAnnotations load_annotations(const std::filesystem::path& path);
void save_annotations(const std::filesystem::path& path, const FrameAnnotations& frame);

/// Newline-delimited paths; relative entries resolve against the manifest's
/// directory. Blank lines and '#' comments are skipped.
std::vector<std::filesystem::path> load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const std::vector<std::filesystem::path>& entries);

/// One violated annotation invariant, addressed by a JSON-style field path.
struct Violation {
  std::string field;
  std::string message;
};

/// Checks dims, finiteness and vertex ordering. With a projection, bottom
/// corners are backprojected to the ground and must form the P1..P4 ring
/// with the annotated width and length, and the world centroid must project
/// within 1 px of the image centroid.
std::vector<Violation> validate_annotation(const Annotation& ann, const ProjectionMatrix* proj = nullptr);

/// Rescales every image coordinate by (sx, sy).
std::vector<Annotation> resize_annotations(std::vector<Annotation> anns, double sx, double sy);

/// Mirrors u -> width - 1 - u and swaps the left/right corner roles so the
/// ordering still holds under mirror_params(). World centroids are dropped.
std::vector<Annotation> hflip(std::vector<Annotation> anns, int image_width);

/// Maps every image point through a 3x3 homography. Throws
/// kSingularHomography for non-invertible matrices.
std::vector<Annotation> perspective_warp(std::vector<Annotation> anns, const Mat3& homography);

/// Homography taking the four image corners to the displaced corners
/// (top-left, top-right, bottom-right, bottom-left order).
Mat3 homography_from_corners(int width, int height, const std::array<ImagePoint, 4>& displaced);

/// Interleaved 8-bit RGB raster.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, 3 channels

  std::uint8_t& at(int row, int col, int ch) {
    return pixels[(static_cast<std::size_t>(row) * width + col) * 3 + ch];
  }
  std::uint8_t at(int row, int col, int ch) const {
    return pixels[(static_cast<std::size_t>(row) * width + col) * 3 + ch];
  }
  friend bool operator==(const Image&, const Image&) = default;
};

Image make_image(int width, int height, std::uint8_t fill = 0);
Image load_ppm(const std::filesystem::path& path);
void save_ppm(const std::filesystem::path& path, const Image& image);

struct ColorJitter {
  double brightness = 0.0;  // additive, in 8-bit levels
  double contrast = 0.0;    // relative, around the mean luma
  double saturation = 0.0;  // relative, around each pixel's luma
};

struct AugmentSpec {
  double max_brightness = 32.0;
  double max_contrast = 0.2;
  double max_saturation = 0.2;
  bool hflip = true;
  /// Largest corner displacement in pixels; must stay below 10% of the width.
  double perspective_px = 40.0;

  void validate(int image_width) const;
};

Image color_jitter(const Image& image, const ColorJitter& jitter);
ColorJitter sample_jitter(const AugmentSpec& spec, std::mt19937_64& rng);
Image hflip_image(const Image& image);
/// Inverse-maps every output pixel through the homography (bilinear).
Image warp_image(const Image& image, const Mat3& homography);
/// Random four-corner displacement bounded by perspective_px.
Mat3 sample_perspective(const AugmentSpec& spec, int width, int height, std::mt19937_64& rng);

struct SynthOptions {
  int n_vehicles = 5;
  std::uint64_t seed = 0;
  double min_gap = 0.5;  // meters between box footprints
  std::string frame_id = "frame_0000";
};

/// Places non-overlapping vehicles on the road with class-conditioned size
/// priors; all corners of every vehicle project inside the image.
std::pair<SceneMeta, FrameAnnotations> synth_scene(const SceneMeta& scene, const SynthOptions& options);

/// The five scenes of the roadside reference dataset (native 1920x1080).
std::vector<SceneMeta> reference_scenes();

}  // namespace roadloc
