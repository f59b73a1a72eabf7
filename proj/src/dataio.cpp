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

#include "roadloc/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "roadloc/error.hpp"
#include "roadloc/fileio.hpp"

namespace roadloc {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& origin, const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::kParseError, origin + ": " + field + ": " + msg);
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line/column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::kParseError,
                origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
}

double get_number(const json& obj, const std::string& key, const std::string& path, const std::string& origin) {
  if (!obj.contains(key)) field_error(origin, path + key, "missing");
  const auto& v = obj.at(key);
  if (!v.is_number()) field_error(origin, path + key, "expected a number");
  return v.get<double>();
}

std::vector<double> get_numbers(const json& v, std::size_t n, const std::string& field, const std::string& origin) {
  if (!v.is_array() || v.size() != n) field_error(origin, field, "expected an array of " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!v[i].is_number()) field_error(origin, field + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

void check_schema(const json& doc, const std::string& origin) {
  if (!doc.contains("schema_version")) return;
  const auto& v = doc.at("schema_version");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion) {
    throw Error(ErrorCode::kSchemaVersionError,
                origin + ": unsupported schema_version " + v.dump() + " (expected " + std::to_string(kSchemaVersion) + ")");
  }
}

json point_json(const ImagePoint& p) { return json::array({p.u, p.v}); }

}  // namespace

SceneMeta scene_from_json(const std::string& text, const std::string& origin) {
  const json doc = parse_json(text, origin);
  if (!doc.is_object()) field_error(origin, "$", "expected an object");
  check_schema(doc, origin);
  SceneMeta s;
  if (doc.contains("scene_id")) {
    if (!doc["scene_id"].is_string()) field_error(origin, "scene_id", "expected a string");
    s.id = doc["scene_id"].get<std::string>();
  }
  s.image_width = static_cast<int>(get_number(doc, "image_width", "", origin));
  s.image_height = static_cast<int>(get_number(doc, "image_height", "", origin));
  s.params.f = get_number(doc, "f", "", origin);
  s.params.phi = get_number(doc, "phi", "", origin);
  s.params.theta = get_number(doc, "theta", "", origin);
  s.params.h = get_number(doc, "h", "", origin);
  std::string unit = "m";
  if (doc.contains("h_unit")) {
    if (!doc["h_unit"].is_string()) field_error(origin, "h_unit", "expected \"mm\" or \"m\"");
    unit = doc["h_unit"].get<std::string>();
  }
  if (unit == "mm") {
    s.params.h /= 1000.0;
  } else if (unit != "m") {
    field_error(origin, "h_unit", "expected \"mm\" or \"m\"");
  }
  s.params.cx = doc.contains("cx") ? get_number(doc, "cx", "", origin) : s.image_width / 2.0;
  s.params.cy = doc.contains("cy") ? get_number(doc, "cy", "", origin) : s.image_height / 2.0;
  s.extent.d_ry = get_number(doc, "D_ry", "", origin);
  s.extent.d_rx = get_number(doc, "D_rx", "", origin);
  try {
    s.params.validate();
    s.extent.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kParseError, origin + ": " + e.what());
  }
  if (s.image_width <= 0 || s.image_height <= 0) field_error(origin, "image_width", "image size must be positive");
  return s;
}

std::string scene_to_json(const SceneMeta& scene) {
  json doc = {{"schema_version", kSchemaVersion},
              {"scene_id", scene.id},
              {"f", scene.params.f},
              {"phi", scene.params.phi},
              {"theta", scene.params.theta},
              {"h", scene.params.h},
              {"h_unit", "m"},
              {"cx", scene.params.cx},
              {"cy", scene.params.cy},
              {"image_width", scene.image_width},
              {"image_height", scene.image_height},
              {"D_ry", scene.extent.d_ry},
              {"D_rx", scene.extent.d_rx}};
  return doc.dump(2) + "\n";
}

SceneMeta load_scene(const std::filesystem::path& path) {
  SceneMeta s = scene_from_json(read_file(path), path.string());
  if (s.id.empty()) s.id = path.stem().string();
  return s;
}

void save_scene(const std::filesystem::path& path, const SceneMeta& scene) {
  write_file_atomic(path, scene_to_json(scene));
}

FrameAnnotations frame_from_json(const std::string& text, const std::string& origin) {
  const json doc = parse_json(text, origin);
  if (!doc.is_object()) field_error(origin, "$", "expected an object");
  check_schema(doc, origin);
  FrameAnnotations f;
  auto get_string = [&](const char* key) -> std::string {
    if (!doc.contains(key)) return {};
    if (!doc[key].is_string()) field_error(origin, key, "expected a string");
    return doc[key].get<std::string>();
  };
  f.scene_id = get_string("scene_id");
  f.frame_id = get_string("frame_id");
  f.image = get_string("image");
  if (doc.contains("revision")) {
    if (!doc["revision"].is_number_integer()) field_error(origin, "revision", "expected an integer");
    f.revision = doc["revision"].get<std::int64_t>();
  }
  if (!doc.contains("objects")) field_error(origin, "objects", "missing");
  const auto& objs = doc["objects"];
  if (!objs.is_array()) field_error(origin, "objects", "expected an array");
  for (std::size_t i = 0; i < objs.size(); ++i) {
    const std::string path = "objects[" + std::to_string(i) + "].";
    const auto& o = objs[i];
    if (!o.is_object()) field_error(origin, path.substr(0, path.size() - 1), "expected an object");
    Annotation a;
    if (!o.contains("class")) field_error(origin, path + "class", "missing");
    if (o["class"].is_string()) {
      a.class_id = class_from_name(o["class"].get<std::string>());
    } else if (o["class"].is_number_integer()) {
      a.class_id = o["class"].get<int>();
    } else {
      field_error(origin, path + "class", "expected a class name");
    }
    if (a.class_id < 0 || a.class_id >= kNumVehicleClasses) field_error(origin, path + "class", "unknown vehicle class");
    if (!o.contains("centroid_uv")) field_error(origin, path + "centroid_uv", "missing");
    const auto c = get_numbers(o["centroid_uv"], 2, path + "centroid_uv", origin);
    a.centroid_uv = {c[0], c[1]};
    if (!o.contains("vertices_uv")) field_error(origin, path + "vertices_uv", "missing");
    const auto& vs = o["vertices_uv"];
    if (!vs.is_array() || vs.size() != 8) field_error(origin, path + "vertices_uv", "expected 8 points");
    for (std::size_t k = 0; k < 8; ++k) {
      const auto p = get_numbers(vs[k], 2, path + "vertices_uv[" + std::to_string(k) + "]", origin);
      a.vertices_uv[k] = {p[0], p[1]};
    }
    if (!o.contains("dim_lwh")) field_error(origin, path + "dim_lwh", "missing");
    const auto d = get_numbers(o["dim_lwh"], 3, path + "dim_lwh", origin);
    a.dim = {d[0], d[1], d[2]};
    if (o.contains("centroid_xyz") && !o["centroid_xyz"].is_null()) {
      const auto w = get_numbers(o["centroid_xyz"], 3, path + "centroid_xyz", origin);
      a.centroid_xyz = WorldPoint{w[0], w[1], w[2]};
    }
    if (o.contains("score") && !o["score"].is_null()) {
      if (!o["score"].is_number()) field_error(origin, path + "score", "expected a number");
      a.score = o["score"].get<double>();
    }
    f.objects.push_back(a);
  }
  return f;
}

std::string frame_to_json(const FrameAnnotations& frame) {
  json objs = json::array();
  for (const auto& a : frame.objects) {
    json verts = json::array();
    for (const auto& p : a.vertices_uv) verts.push_back(point_json(p));
    json o = {{"class", class_name(a.class_id)},
              {"centroid_uv", point_json(a.centroid_uv)},
              {"vertices_uv", verts},
              {"dim_lwh", json::array({a.dim.l, a.dim.w, a.dim.h})}};
    if (a.centroid_xyz) o["centroid_xyz"] = json::array({a.centroid_xyz->x, a.centroid_xyz->y, a.centroid_xyz->z});
    if (a.score) o["score"] = *a.score;
    objs.push_back(o);
  }
  json doc = {{"schema_version", kSchemaVersion},
              {"scene_id", frame.scene_id},
              {"frame_id", frame.frame_id},
              {"revision", frame.revision},
              {"objects", objs}};
  if (!frame.image.empty()) doc["image"] = frame.image;
  return doc.dump(2) + "\n";
}

FrameAnnotations load_annotations(const std::filesystem::path& path) {
  return frame_from_json(read_file(path), path.string());
}

void save_annotations(const std::filesystem::path& path, const FrameAnnotations& frame) {
  write_file_atomic(path, frame_to_json(frame));
}

std::vector<std::filesystem::path> load_manifest(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::filesystem::path> out;
  const auto base = path.parent_path();
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    std::filesystem::path p = line.substr(first, last - first + 1);
    out.push_back(p.is_absolute() ? p : base / p);
  }
  return out;
}

void save_manifest(const std::filesystem::path& path, const std::vector<std::filesystem::path>& entries) {
  std::string text;
  for (const auto& e : entries) text += e.generic_string() + "\n";
  write_file_atomic(path, text);
}

std::vector<Violation> validate_annotation(const Annotation& ann, const ProjectionMatrix* proj) {
  std::vector<Violation> out;
  if (ann.class_id < 0 || ann.class_id >= kNumVehicleClasses) out.push_back({"class", "unknown vehicle class"});
  const auto& d = ann.dim;
  if (!(std::isfinite(d.l) && std::isfinite(d.w) && std::isfinite(d.h) && d.l > 0.0 && d.w > 0.0 && d.h > 0.0)) {
    out.push_back({"dim_lwh", "dimensions must be finite and positive"});
  }
  if (!std::isfinite(ann.centroid_uv.u) || !std::isfinite(ann.centroid_uv.v)) {
    out.push_back({"centroid_uv", "not finite"});
  }
  bool vertices_finite = true;
  for (std::size_t k = 0; k < 8; ++k) {
    if (!std::isfinite(ann.vertices_uv[k].u) || !std::isfinite(ann.vertices_uv[k].v)) {
      out.push_back({"vertices_uv[" + std::to_string(k) + "]", "not finite"});
      vertices_finite = false;
    }
  }
  if (!vertices_finite) return out;
  for (std::size_t k = 0; k < 4; ++k) {
    if (!(ann.vertices_uv[k + 4].v < ann.vertices_uv[k].v)) {
      out.push_back({"vertices_uv[" + std::to_string(k + 4) + "]", "top corner must lie above its bottom corner"});
    }
  }
  if (proj == nullptr || !out.empty()) return out;

  const double z0 = ann.centroid_xyz ? ann.centroid_xyz->z - d.h / 2.0 : 0.0;
  std::array<WorldPoint, 8> world;
  try {
    for (std::size_t k = 0; k < 8; ++k) world[k] = image_to_world(*proj, ann.vertices_uv[k], k < 4 ? z0 : z0 + d.h);
  } catch (const Error& e) {
    out.push_back({"vertices_uv", e.what()});
    return out;
  }
  const double tol_w = 0.05 * d.w + 0.05, tol_l = 0.05 * d.l + 0.05;
  struct Edge {
    int from, to;
    double dx, dy;
  };
  // Expected offsets of P1, P3, P4 from P2 along (x, y).
  const Edge edges[] = {{1, 0, d.w, 0.0}, {1, 2, 0.0, d.l}, {1, 3, d.w, d.l}};
  for (const auto& e : edges) {
    const double ex = world[e.to].x - world[e.from].x, ey = world[e.to].y - world[e.from].y;
    if (std::abs(ex - e.dx) > tol_w || std::abs(ey - e.dy) > tol_l) {
      out.push_back({"vertices_uv[" + std::to_string(e.to) + "]", "corner ordering does not match the P1..P8 layout"});
    }
  }
  for (std::size_t k = 0; k < 4; ++k) {
    if (std::abs(world[k + 4].x - world[k].x) > tol_w || std::abs(world[k + 4].y - world[k].y) > tol_l) {
      out.push_back({"vertices_uv[" + std::to_string(k + 4) + "]", "top corner is not above its bottom corner"});
    }
  }
  if (ann.centroid_xyz) {
    try {
      const ImagePoint c = world_to_image(*proj, *ann.centroid_xyz);
      if (distance(c, ann.centroid_uv) > 1.0) {
        out.push_back({"centroid_xyz", "world centroid does not project within 1 px of centroid_uv"});
      }
    } catch (const Error& e) {
      out.push_back({"centroid_xyz", e.what()});
    }
  }
  return out;
}

std::vector<Annotation> resize_annotations(std::vector<Annotation> anns, double sx, double sy) {
  for (auto& a : anns) {
    a.centroid_uv = {a.centroid_uv.u * sx, a.centroid_uv.v * sy};
    for (auto& p : a.vertices_uv) p = {p.u * sx, p.v * sy};
  }
  return anns;
}

std::vector<Annotation> hflip(std::vector<Annotation> anns, int image_width) {
  const double w1 = static_cast<double>(image_width - 1);
  for (auto& a : anns) {
    a.centroid_uv.u = w1 - a.centroid_uv.u;
    for (auto& p : a.vertices_uv) p.u = w1 - p.u;
    // +x and -x corners trade places: P1<->P2, P3<->P4, P5<->P6, P7<->P8.
    for (int k = 0; k < 8; k += 2) std::swap(a.vertices_uv[k], a.vertices_uv[k + 1]);
    a.centroid_xyz.reset();
  }
  return anns;
}

namespace {

ImagePoint apply_homography(const Mat3& hm, const ImagePoint& p) {
  const Eigen::Vector3d q = hm * Eigen::Vector3d(p.u, p.v, 1.0);
  if (std::abs(q.z()) < kDegeneracyTolerance) {
    throw Error(ErrorCode::kSingularHomography, "homography maps a point to infinity");
  }
  return {q.x() / q.z(), q.y() / q.z()};
}

void check_invertible(const Mat3& hm) {
  const double scale = hm.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || !std::isfinite(scale) || std::abs((hm / scale).determinant()) < 1e-12) {
    throw Error(ErrorCode::kSingularHomography, "homography is not invertible");
  }
}

}  // namespace

std::vector<Annotation> perspective_warp(std::vector<Annotation> anns, const Mat3& homography) {
  check_invertible(homography);
  for (auto& a : anns) {
    a.centroid_uv = apply_homography(homography, a.centroid_uv);
    for (auto& p : a.vertices_uv) p = apply_homography(homography, p);
  }
  return anns;
}

Mat3 homography_from_corners(int width, int height, const std::array<ImagePoint, 4>& displaced) {
  const double w1 = width - 1.0, h1 = height - 1.0;
  const std::array<ImagePoint, 4> src{{{0.0, 0.0}, {w1, 0.0}, {w1, h1}, {0.0, h1}}};
  Eigen::Matrix<double, 8, 8> a;
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const double x = src[i].u, y = src[i].v, u = displaced[i].u, v = displaced[i].v;
    a.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
    a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
    b(2 * i) = u;
    b(2 * i + 1) = v;
  }
  const Eigen::Matrix<double, 8, 1> h = a.fullPivLu().solve(b);
  Mat3 hm;
  hm << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0;
  return hm;
}

void AugmentSpec::validate(int image_width) const {
  if (!(perspective_px >= 0.0 && perspective_px < 0.1 * image_width)) {
    throw Error(ErrorCode::kInvalidArgument, "perspective displacement must stay below 10% of the image width");
  }
  if (!(max_brightness >= 0.0 && max_contrast >= 0.0 && max_saturation >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "jitter ranges must be non-negative");
  }
}

Image make_image(int width, int height, std::uint8_t fill) {
  if (width < 0 || height < 0) throw Error(ErrorCode::kInvalidArgument, "image size must be non-negative");
  Image img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<std::size_t>(width) * height * 3, fill);
  return img;
}

Image load_ppm(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  std::istringstream in(data);
  std::string magic;
  in >> magic;
  auto next_int = [&]() {
    int v = -1;
    while (in >> std::ws && in.peek() == '#') {
      std::string skip;
      std::getline(in, skip);
    }
    in >> v;
    return v;
  };
  const int w = next_int(), h = next_int(), maxval = next_int();
  if (magic != "P6" || w < 0 || h < 0 || maxval != 255) {
    throw Error(ErrorCode::kParseError, path.string() + ": expected a binary 8-bit PPM (P6)");
  }
  in.get();
  Image img = make_image(w, h);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw Error(ErrorCode::kParseError, path.string() + ": truncated pixel data");
  }
  return img;
}

void save_ppm(const std::filesystem::path& path, const Image& image) {
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
  write_file_atomic(path, out);
}

namespace {

double luma(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

}  // namespace

Image color_jitter(const Image& image, const ColorJitter& jitter) {
  double mean_luma = 0.0;
  const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
  for (std::size_t i = 0; i < n; ++i) {
    mean_luma += luma(image.pixels[3 * i], image.pixels[3 * i + 1], image.pixels[3 * i + 2]);
  }
  if (n > 0) mean_luma /= static_cast<double>(n);

  Image out = image;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = luma(image.pixels[3 * i], image.pixels[3 * i + 1], image.pixels[3 * i + 2]);
    for (int c = 0; c < 3; ++c) {
      double v = image.pixels[3 * i + c];
      if (jitter.saturation != 0.0) v = y + (v - y) * (1.0 + jitter.saturation);
      if (jitter.contrast != 0.0) v = mean_luma + (v - mean_luma) * (1.0 + jitter.contrast);
      v += jitter.brightness;
      out.pixels[3 * i + c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return out;
}

ColorJitter sample_jitter(const AugmentSpec& spec, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  return {spec.max_brightness * unit(rng), spec.max_contrast * unit(rng), spec.max_saturation * unit(rng)};
}

Image hflip_image(const Image& image) {
  Image out = image;
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = image.at(r, image.width - 1 - c, ch);
    }
  }
  return out;
}

Image warp_image(const Image& image, const Mat3& homography) {
  check_invertible(homography);
  const Mat3 inv = homography.inverse();
  Image out = make_image(image.width, image.height);
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      const Eigen::Vector3d q = inv * Eigen::Vector3d(c, r, 1.0);
      if (std::abs(q.z()) < kDegeneracyTolerance) continue;
      const double x = q.x() / q.z(), y = q.y() / q.z();
      const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
      if (x0 < 0 || y0 < 0 || x0 >= image.width || y0 >= image.height) continue;
      // The far neighbor is clamped so the last row and column still sample.
      const int x1 = std::min(x0 + 1, image.width - 1), y1 = std::min(y0 + 1, image.height - 1);
      const double fx = x - x0, fy = y - y0;
      for (int ch = 0; ch < 3; ++ch) {
        const double v = (1 - fx) * (1 - fy) * image.at(y0, x0, ch) + fx * (1 - fy) * image.at(y0, x1, ch) +
                         (1 - fx) * fy * image.at(y1, x0, ch) + fx * fy * image.at(y1, x1, ch);
        out.at(r, c, ch) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

Mat3 sample_perspective(const AugmentSpec& spec, int width, int height, std::mt19937_64& rng) {
  spec.validate(width);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double w1 = width - 1.0, h1 = height - 1.0;
  std::array<ImagePoint, 4> corners{{{0.0, 0.0}, {w1, 0.0}, {w1, h1}, {0.0, h1}}};
  for (auto& p : corners) {
    p.u += spec.perspective_px * unit(rng);
    p.v += spec.perspective_px * unit(rng);
  }
  return homography_from_corners(width, height, corners);
}

namespace {

struct SizePrior {
  Dimension3D mean;
  double spread;
};

// Ground-truth means from the reference dataset; truck is our own prior.
constexpr SizePrior kPriors[kNumVehicleClasses] = {
    {{4.5, 1.8, 1.45}, 0.10},
    {{6.5, 2.3, 2.6}, 0.10},
    {{12.0, 2.76, 2.82}, 0.05},
};

bool footprints_clear(const Box3D& a, const Box3D& b, double gap) {
  const bool sep_x = std::abs(a.centroid.x - b.centroid.x) >= (a.dim.w + b.dim.w) / 2.0 + gap;
  const bool sep_y = std::abs(a.centroid.y - b.centroid.y) >= (a.dim.l + b.dim.l) / 2.0 + gap;
  return sep_x || sep_y;
}

bool fully_visible(const ProjectionMatrix& proj, const Box3D& box, int width, int height) {
  const auto& hm = proj.m;
  auto check = [&](const WorldPoint& p) {
    const double den = hm(2, 0) * p.x + hm(2, 1) * p.y + hm(2, 2) * p.z + hm(2, 3);
    if (!(den > kDegeneracyTolerance)) return false;
    const ImagePoint q = world_to_image(proj, p);
    return q.u >= 0.0 && q.u < width && q.v >= 0.0 && q.v < height;
  };
  if (!check(box.centroid)) return false;
  for (const auto& v : gt_vertices(box)) {
    if (!check(v)) return false;
  }
  return true;
}

}  // namespace

std::pair<SceneMeta, FrameAnnotations> synth_scene(const SceneMeta& scene, const SynthOptions& options) {
  if (options.n_vehicles < 0) throw Error(ErrorCode::kInvalidArgument, "vehicle count must be non-negative");
  scene.params.validate();
  scene.extent.validate();
  const ProjectionMatrix proj = scene.projection();
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::discrete_distribution<int> pick_class({0.7, 0.15, 0.15});

  FrameAnnotations frame;
  frame.scene_id = scene.id;
  frame.frame_id = options.frame_id;
  std::vector<Box3D> placed;
  const int max_attempts = 20000;
  for (int v = 0; v < options.n_vehicles; ++v) {
    bool ok = false;
    for (int attempt = 0; attempt < max_attempts && !ok; ++attempt) {
      Box3D box;
      box.class_id = pick_class(rng);
      const auto& prior = kPriors[box.class_id];
      auto jitter = [&](double m) { return m * (1.0 + prior.spread * (2.0 * unit(rng) - 1.0)); };
      box.dim = {jitter(prior.mean.l), jitter(prior.mean.w), jitter(prior.mean.h)};
      box.centroid.x = (unit(rng) - 0.5) * scene.extent.d_rx;
      box.centroid.y = unit(rng) * scene.extent.d_ry;
      box.centroid.z = box.dim.h / 2.0;
      if (!fully_visible(proj, box, scene.image_width, scene.image_height)) continue;
      if (!std::all_of(placed.begin(), placed.end(),
                       [&](const Box3D& o) { return footprints_clear(box, o, options.min_gap); })) {
        continue;
      }
      placed.push_back(box);
      frame.objects.push_back(annotate_box(box, proj));
      ok = true;
    }
    if (!ok) throw Error(ErrorCode::kInvalidArgument, "could not place vehicle " + std::to_string(v) + " in the scene");
  }
  return {scene, frame};
}

std::vector<SceneMeta> reference_scenes() {
  struct Row {
    const char* id;
    double d_ry, d_rx, f, phi, theta, h_mm;
  };
  constexpr Row rows[] = {
      {"A", 120, 25, 2878.13, 0.17874, 0.26604, 10119.08},
      {"B", 120, 25, 3994.17, 0.15717, 0.35346, 8071.00},
      {"C", 60, 15, 3384.25, 0.26295, -0.24869, 8126.49},
      {"D", 80, 10, 3743.78, 0.11225, -0.07516, 7353.40},
      {"E", 60, 10, 1142.26, 0.33372, 0.14387, 7166.44},
  };
  std::vector<SceneMeta> out;
  for (const auto& r : rows) {
    SceneMeta s;
    s.id = r.id;
    s.params = {r.f, r.phi, r.theta, r.h_mm / 1000.0, 960.0, 540.0};
    s.extent = {r.d_ry, r.d_rx};
    s.image_width = 1920;
    s.image_height = 1080;
    out.push_back(s);
  }
  return out;
}

}  // namespace roadloc
