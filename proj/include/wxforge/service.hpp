// Copyright 2026 The wxforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Local HTTP preview service for parameter calibration.
//
//   GET  /api/images?page=&size=      ingested sources, 1-based pages
//   GET  /api/images/{id}/thumbnail   PNG, long edge <= 256
//   POST /api/preview                 {image_id, family, params, seed} -> PNG
//   GET  /api/presets                 custom presets of the tables file
//   POST /api/presets                 {name, family, params, note} -> 201
//   GET  /api/families                parameter schemas and level rows
//
// Handlers are plain member functions so they can be exercised without a
// socket; HttpServer binds them to routes.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wxforge/manifest.hpp"
#include "wxforge/params.hpp"
#include "wxforge/pipeline.hpp"

namespace wxforge {

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
};

inline constexpr const char* kContentHashHeader = "X-Content-Hash";

struct ServiceOptions {
  /// Ingested sources (`wxforge ingest` output); without it image routes
  /// answer 503.
  std::optional<std::filesystem::path> sources;
  /// Tables file that presets are appended to; without it the built-in
  /// tables are served read-only and preset saves answer 503.
  std::optional<std::filesystem::path> tables;
  int preview_max_edge = 960;
  int thumbnail_max_edge = 256;
  /// ISO-8601 UTC timestamp for new presets.
  std::function<std::string()> clock;
};

class PreviewService {
 public:
  /// Errors: those of read_sources and IntensityTables::load.
  explicit PreviewService(ServiceOptions options);

  HttpResponse list_images(int page, int size) const;
  HttpResponse thumbnail(std::string_view image_id) const;
  /// 400 malformed JSON, 404 unknown image, 422 invalid family or params
  /// (body names the field). Params missing from the request are taken
  /// from level 1 of the family. Writes nothing.
  HttpResponse preview(std::string_view body) const;
  HttpResponse list_presets() const;
  /// 201 created, 409 duplicate name, 422 invalid name, family or params.
  HttpResponse save_preset(std::string_view body);
  HttpResponse families() const;

 private:
  std::shared_ptr<const LoadedScene> scene(const SourceRecord& record) const;
  const SourceRecord* find(std::string_view image_id) const;

  ServiceOptions options_;
  std::optional<std::vector<SourceRecord>> sources_;
  IntensityTables tables_;
  mutable std::shared_mutex tables_mutex_;
  std::mutex file_mutex_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::string, std::shared_ptr<const LoadedScene>, std::less<>> cache_;
};

/// FNV-1a 64 of `bytes` as 16 lowercase hex digits.
std::string content_hash_hex(std::string_view bytes);

/// Binds a PreviewService to HTTP routes, optionally serving static files
/// from `static_dir` at "/".
class HttpServer {
 public:
  HttpServer(PreviewService& service, std::optional<std::filesystem::path> static_dir = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds without serving; port 0 picks a free port. Returns the port.
  /// Errors: io-error.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace wxforge
