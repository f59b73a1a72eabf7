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

#include "roadloc/service.hpp"

#include <cstdlib>
#include <iostream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "roadloc/error.hpp"
#include "roadloc/fileio.hpp"

namespace roadloc {
namespace {

using json = nlohmann::json;

Response json_response(int status, const json& body) { return {status, body.dump(), "application/json"}; }

Response error_response(int status, const std::string& message, const json& extra = json::object()) {
  json body = extra;
  body["error"] = message;
  return json_response(status, body);
}

// Library error codes to HTTP statuses: malformed payloads are 400, inputs
// that parse but cannot be evaluated are 422.
int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError:
    case ErrorCode::kSchemaVersionError:
      return 400;
    case ErrorCode::kIoError:
      return 404;
    default:
      return 422;
  }
}

Response from_error(const Error& e) {
  json extra = json::object();
  extra["code"] = to_string(e.code());
  if (e.index()) extra["index"] = *e.index();
  return error_response(status_for(e.code()), e.what(), extra);
}

template <typename Fn>
Response guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return from_error(e);
  } catch (const json::exception& e) {
    return error_response(400, std::string("malformed request: ") + e.what());
  }
}

json parse_body(const std::string& body) {
  json doc = json::parse(body);
  if (!doc.is_object()) throw Error(ErrorCode::kParseError, "request body must be a JSON object");
  return doc;
}

double number_at(const json& v, const std::string& field) {
  if (!v.is_number()) throw Error(ErrorCode::kParseError, field + ": expected a number");
  return v.get<double>();
}

std::vector<double> numbers(const json& v, std::size_t n, const std::string& field) {
  if (!v.is_array() || v.size() != n) {
    throw Error(ErrorCode::kParseError, field + ": expected an array of " + std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(number_at(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

const json& require(const json& doc, const std::string& key) {
  if (!doc.contains(key)) throw Error(ErrorCode::kParseError, key + ": missing");
  return doc.at(key);
}

json point_json(const ImagePoint& p) { return json::array({p.u, p.v}); }
json point_json(const WorldPoint& p) { return json::array({p.x, p.y, p.z}); }

json rect_json(const Rect2D& r) {
  return {{"min", json::array({r.min_u, r.min_v})}, {"max", json::array({r.max_u, r.max_v})}};
}

// Frame ids become file names; keep them to a conservative alphabet.
bool valid_frame_id(const std::string& id) {
  if (id.empty() || id.size() > 128 || id[0] == '.') return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                    c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

// Document content without the revision counter, for idempotent retries.
std::string content_key(FrameAnnotations frame) {
  frame.revision = 0;
  return frame_to_json(frame);
}

std::filesystem::path resolve_against(const std::filesystem::path& base, const std::filesystem::path& p) {
  if (p.empty() || p.is_absolute()) return p;
  return base / p;
}

}  // namespace

ServerConfig ServerConfig::load(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kParseError, path.string() + ": expected an object");
  const auto base = path.parent_path();
  ServerConfig cfg;
  try {
    if (doc.contains("host")) cfg.host = doc["host"].get<std::string>();
    if (doc.contains("port")) cfg.port = doc["port"].get<int>();
    if (doc.contains("scenes_dir")) cfg.scenes_dir = resolve_against(base, doc["scenes_dir"].get<std::string>());
    if (doc.contains("data_dir")) cfg.data_dir = resolve_against(base, doc["data_dir"].get<std::string>());
    if (doc.contains("ui_dir")) cfg.ui_dir = resolve_against(base, doc["ui_dir"].get<std::string>());
  } catch (const json::type_error& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  if (const char* env = std::getenv("ROADLOC_PORT"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long port = std::strtol(env, &end, 10);
    if (*end != '\0') throw Error(ErrorCode::kInvalidArgument, "ROADLOC_PORT is not a number");
    cfg.port = static_cast<int>(port);
  }
  if (cfg.port < 0 || cfg.port > 65535) throw Error(ErrorCode::kInvalidArgument, "port out of range");
  return cfg;
}

AnnotationService::AnnotationService(ServerConfig config) : config_(std::move(config)) {
  if (config_.scenes_dir.empty() || !std::filesystem::is_directory(config_.scenes_dir)) return;
  for (const auto& entry : std::filesystem::directory_iterator(config_.scenes_dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    SceneMeta scene = load_scene(entry.path());
    scenes_[scene.id] = std::move(scene);
  }
}

const SceneMeta* AnnotationService::find_scene(const std::string& id) const {
  const auto it = scenes_.find(id);
  return it == scenes_.end() ? nullptr : &it->second;
}

std::filesystem::path AnnotationService::annotation_path(const std::string& frame_id) const {
  return config_.data_dir / "annotations" / (frame_id + ".json");
}

std::mutex& AnnotationService::frame_mutex(const std::string& frame_id) {
  std::lock_guard lock(locks_mutex_);
  auto& slot = frame_locks_[frame_id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

Response AnnotationService::list_scenes() const {
  json out = json::array();
  for (const auto& [id, scene] : scenes_) out.push_back(json::parse(scene_to_json(scene)));
  return json_response(200, out);
}

Response AnnotationService::get_scene(const std::string& id) const {
  const SceneMeta* scene = find_scene(id);
  if (scene == nullptr) return error_response(404, "unknown scene '" + id + "'");
  return {200, scene_to_json(*scene), "application/json"};
}

Response AnnotationService::project(const std::string& body) const {
  return guarded([&] {
    const json doc = parse_body(body);
    const std::string id = require(doc, "scene").get<std::string>();
    const SceneMeta* scene = find_scene(id);
    if (scene == nullptr) return error_response(404, "unknown scene '" + id + "'");
    const json& pts = require(doc, "points_world");
    if (!pts.is_array()) throw Error(ErrorCode::kParseError, "points_world: expected an array");
    const ProjectionMatrix proj = scene->projection();
    json out = json::array();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto v = numbers(pts[i], 3, "points_world[" + std::to_string(i) + "]");
      try {
        out.push_back(point_json(world_to_image(proj, {v[0], v[1], v[2]})));
      } catch (const Error& e) {
        throw Error(e.code(), "points_world[" + std::to_string(i) + "]: " + e.what(), i);
      }
    }
    return json_response(200, {{"points_image", out}});
  });
}

Response AnnotationService::backproject(const std::string& body) const {
  return guarded([&] {
    const json doc = parse_body(body);
    const std::string id = require(doc, "scene").get<std::string>();
    const SceneMeta* scene = find_scene(id);
    if (scene == nullptr) return error_response(404, "unknown scene '" + id + "'");
    const json& pts = require(doc, "points_image");
    if (!pts.is_array()) throw Error(ErrorCode::kParseError, "points_image: expected an array");
    const double z = doc.contains("z") ? number_at(doc["z"], "z") : 0.0;
    const ProjectionMatrix proj = scene->projection();
    json out = json::array();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto v = numbers(pts[i], 2, "points_image[" + std::to_string(i) + "]");
      try {
        out.push_back(point_json(image_to_world(proj, {v[0], v[1]}, z)));
      } catch (const Error& e) {
        throw Error(e.code(), "points_image[" + std::to_string(i) + "]: " + e.what(), i);
      }
    }
    return json_response(200, {{"points_world", out}});
  });
}

Response AnnotationService::box_preview(const std::string& body) const {
  return guarded([&] {
    const json doc = parse_body(body);
    const std::string id = require(doc, "scene").get<std::string>();
    const SceneMeta* scene = find_scene(id);
    if (scene == nullptr) return error_response(404, "unknown scene '" + id + "'");
    const ProjectionMatrix proj = scene->projection();

    const auto d = numbers(require(doc, "dim_lwh"), 3, "dim_lwh");
    Box3D box;
    box.dim = {d[0], d[1], d[2]};
    validate_dimension(box.dim);
    if (doc.contains("class")) box.class_id = class_from_name(doc["class"].get<std::string>());

    WorldPoint base;
    if (doc.contains("base_xy")) {
      const auto xy = numbers(doc["base_xy"], 2, "base_xy");
      base = {xy[0], xy[1], 0.0};
    } else if (doc.contains("base_uv")) {
      const auto uv = numbers(doc["base_uv"], 2, "base_uv");
      base = image_to_world(proj, {uv[0], uv[1]}, 0.0);
    } else {
      throw Error(ErrorCode::kParseError, "base_uv or base_xy is required");
    }
    box.centroid = {base.x, base.y, box.dim.h / 2.0};

    const VertexSet world = gt_vertices(box);
    const ImageOctet image = project_box(proj, world);
    const Rect2D rect = min_external_rect(image);

    json out;
    out["class"] = class_name(box.class_id);
    out["centroid_world"] = point_json(box.centroid);
    out["centroid_image"] = point_json(world_to_image(proj, box.centroid));
    out["vertices_world"] = json::array();
    out["vertices_image"] = json::array();
    for (const auto& p : world) out["vertices_world"].push_back(point_json(p));
    for (const auto& p : image) out["vertices_image"].push_back(point_json(p));
    out["rect2d"] = rect_json(rect);
    if (doc.contains("guide_rect")) {
      const auto g = numbers(doc["guide_rect"], 4, "guide_rect");
      out["fit_iou"] = iou2d(rect, Rect2D{g[0], g[1], g[2], g[3]});
    }
    return json_response(200, out);
  });
}

Response AnnotationService::get_annotations(const std::string& frame_id) const {
  if (!valid_frame_id(frame_id)) return error_response(400, "invalid frame id");
  const auto path = annotation_path(frame_id);
  if (!std::filesystem::exists(path)) return error_response(404, "no annotations for frame '" + frame_id + "'");
  return guarded([&] { return Response{200, read_file(path), "application/json"}; });
}

Response AnnotationService::put_annotations(const std::string& frame_id, const std::string& body) {
  if (!valid_frame_id(frame_id)) return error_response(400, "invalid frame id");
  return guarded([&] {
    FrameAnnotations frame = frame_from_json(body, "request");
    if (frame.frame_id.empty()) frame.frame_id = frame_id;
    if (frame.frame_id != frame_id) return error_response(422, "frame_id does not match the URL", {{"field", "frame_id"}});
    const SceneMeta* scene = find_scene(frame.scene_id);
    if (scene == nullptr) return error_response(422, "unknown scene '" + frame.scene_id + "'", {{"field", "scene_id"}});

    const ProjectionMatrix proj = scene->projection();
    json violations = json::array();
    for (std::size_t i = 0; i < frame.objects.size(); ++i) {
      for (const auto& v : validate_annotation(frame.objects[i], &proj)) {
        violations.push_back({{"field", "objects[" + std::to_string(i) + "]." + v.field}, {"message", v.message}});
      }
    }
    if (!violations.empty()) return error_response(422, "annotation invariants violated", {{"violations", violations}});

    std::lock_guard lock(frame_mutex(frame_id));
    const auto path = annotation_path(frame_id);
    std::int64_t stored_revision = 0;
    std::optional<FrameAnnotations> stored;
    if (std::filesystem::exists(path)) {
      stored = load_annotations(path);
      stored_revision = stored->revision;
    }
    if (frame.revision != stored_revision) {
      // A retry of the write that produced the stored revision succeeds again.
      if (stored && frame.revision + 1 == stored_revision && content_key(frame) == content_key(*stored)) {
        return Response{200, frame_to_json(*stored), "application/json"};
      }
      return error_response(409, "revision conflict", {{"expected_revision", stored_revision},
                                                       {"received_revision", frame.revision}});
    }
    frame.revision = stored_revision + 1;
    const std::string text = frame_to_json(frame);
    write_file_atomic(path, text);
    return Response{200, text, "application/json"};
  });
}

Response AnnotationService::eval(const std::string& body, const ProgressFn& progress) const {
  return guarded([&] {
    const json doc = parse_body(body);
    const std::filesystem::path manifest =
        resolve_against(config_.data_dir, require(doc, "manifest").get<std::string>());
    EvalOptions options;
    if (doc.contains("thresholds")) {
      const json& t = doc["thresholds"];
      if (!t.is_array() || t.empty()) throw Error(ErrorCode::kParseError, "thresholds: expected a non-empty array");
      options.thresholds.clear();
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double thr = number_at(t[i], "thresholds[" + std::to_string(i) + "]");
        if (!(thr > 0.0 && thr <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "thresholds must lie in (0, 1]");
        options.thresholds.push_back(thr);
      }
    }
    if (doc.contains("bin_width")) options.bin_width = number_at(doc["bin_width"], "bin_width");
    if (doc.contains("class_aware")) options.class_aware = doc["class_aware"].get<bool>();
    const EvalReport report = evaluate_manifest(
        manifest, [this](const std::string& id) { return find_scene(id); }, options, progress);
    return Response{200, report_to_json(report), "application/json"};
  });
}

void AnnotationService::mount(httplib::Server& server) {
  auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get("/scenes", [this, send](const httplib::Request&, httplib::Response& res) { send(res, list_scenes()); });
  server.Get(R"(/scenes/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, get_scene(req.matches[1]));
  });
  server.Post("/project", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, project(req.body));
  });
  server.Post("/backproject", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, backproject(req.body));
  });
  server.Post("/box/preview", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, box_preview(req.body));
  });
  server.Get(R"(/frames/([^/]+)/annotations)", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, get_annotations(req.matches[1]));
  });
  server.Put(R"(/frames/([^/]+)/annotations)", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, put_annotations(req.matches[1], req.body));
  });
  server.Post("/eval", [this, send](const httplib::Request& req, httplib::Response& res) {
    bool stream = false;
    try {
      const json doc = json::parse(req.body);
      stream = doc.is_object() && doc.value("stream", false);
    } catch (const json::exception&) {
    }
    if (!stream) {
      send(res, eval(req.body));
      return;
    }
    // NDJSON: one {"done", "total"} line per frame, then {"status", "report"}.
    const std::string body = req.body;
    res.set_chunked_content_provider("application/x-ndjson", [this, body](std::size_t, httplib::DataSink& sink) {
      auto progress = [&sink](std::size_t done, std::size_t total) {
        const std::string line = json{{"done", done}, {"total", total}}.dump() + "\n";
        sink.write(line.data(), line.size());
      };
      const Response r = eval(body, progress);
      const std::string last = json{{"status", r.status}, {"report", json::parse(r.body)}}.dump() + "\n";
      sink.write(last.data(), last.size());
      sink.done();
      return true;
    });
  });

  if (!config_.data_dir.empty() && std::filesystem::is_directory(config_.data_dir / "static")) {
    server.set_mount_point("/static", (config_.data_dir / "static").string());
  }
  if (!config_.ui_dir.empty() && std::filesystem::is_directory(config_.ui_dir)) {
    server.set_mount_point("/ui", config_.ui_dir.string());
  }
}

bool run_server(const ServerConfig& config) {
  AnnotationService service(config);
  httplib::Server server;
  service.mount(server);
  std::clog << "roadloc: serving " << service.config().scenes_dir << " on " << config.host << ':' << config.port
            << '\n';
  return server.listen(config.host, config.port);
}

}  // namespace roadloc
