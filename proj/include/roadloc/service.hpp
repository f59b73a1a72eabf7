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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "roadloc/dataio.hpp"
#include "roadloc/pipeline.hpp"

namespace httplib {
class Server;
}

namespace roadloc {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path scenes_dir;
  std::filesystem::path data_dir;
  /// Optional directory served at /ui (the browser client).
  std::filesystem::path ui_dir;

  /// Reads {port, scenes_dir, data_dir, host?, ui_dir?}; relative directories
  /// resolve against the config file. ROADLOC_PORT overrides the port.
  static ServerConfig load(const std::filesystem::path& path);
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Geometry, annotation and evaluation endpoints, independent of the
/// transport. Geometry handlers are stateless; annotation writes use
/// optimistic concurrency on the document revision.
class AnnotationService {
 public:
  explicit AnnotationService(ServerConfig config);

  Response list_scenes() const;
  Response get_scene(const std::string& id) const;
  Response project(const std::string& body) const;
  Response backproject(const std::string& body) const;
  Response box_preview(const std::string& body) const;
  Response get_annotations(const std::string& frame_id) const;
  Response put_annotations(const std::string& frame_id, const std::string& body);
  Response eval(const std::string& body, const ProgressFn& progress = {}) const;

  /// Registers every endpoint (and static mounts) on `server`.
  void mount(httplib::Server& server);

  const ServerConfig& config() const { return config_; }

 private:
  const SceneMeta* find_scene(const std::string& id) const;
  std::filesystem::path annotation_path(const std::string& frame_id) const;
  std::mutex& frame_mutex(const std::string& frame_id);

  ServerConfig config_;
  std::map<std::string, SceneMeta> scenes_;
  std::mutex locks_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> frame_locks_;
};

/// Blocks serving `config` until the process is stopped. Returns false if
/// the port cannot be bound.
bool run_server(const ServerConfig& config);

}  // namespace roadloc
