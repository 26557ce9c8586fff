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

#include "wxforge/service.hpp"

#include <chrono>
#include <ctime>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "wxforge/error.hpp"
#include "wxforge/image_io.hpp"
#include "wxforge/random.hpp"
#include "wxforge/table.hpp"

namespace wxforge {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr std::size_t kSceneCacheSize = 16;

HttpResponse json_response(int status, const ojson& body) {
  return HttpResponse{status, "application/json", body.dump(2) + "\n", {}};
}

HttpResponse error_response(int status, std::string_view kind, std::string_view message,
                            std::optional<std::string_view> field = {}) {
  ojson body{{"error", kind}, {"message", message}};
  if (field) {
    body["field"] = *field;
  }
  return json_response(status, body);
}

HttpResponse png_response(std::vector<std::uint8_t> bytes) {
  HttpResponse r;
  r.content_type = "image/png";
  r.body.assign(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  r.headers.emplace_back(kContentHashHeader, content_hash_hex(r.body));
  return r;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ojson preset_json(const Preset& p) {
  return ojson{{"name", p.name},
               {"family", family_name(p.family)},
               {"params", params_to_json(p.params)},
               {"note", p.note},
               {"created_at", p.created_at}};
}

const char* kind_label(FieldKind k) {
  switch (k) {
    case FieldKind::kReal:
      return "real";
    case FieldKind::kCount:
      return "count";
    case FieldKind::kRgb:
      return "rgb";
    case FieldKind::kRange:
      return "range";
  }
  return "real";
}

std::optional<Family> family_or_null(const json& j) {
  if (!j.is_string()) {
    return std::nullopt;
  }
  try {
    return parse_family(j.get<std::string>());
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

std::string content_hash_hex(std::string_view bytes) {
  return fmt::format("{:016x}", fnv1a64(bytes));
}

PreviewService::PreviewService(ServiceOptions options)
    : options_(std::move(options)),
      tables_(options_.tables ? IntensityTables::load(*options_.tables)
                              : IntensityTables::builtin()) {
  if (options_.sources) {
    sources_ = read_sources(*options_.sources);
  }
  if (!options_.clock) {
    options_.clock = utc_now;
  }
}

const SourceRecord* PreviewService::find(std::string_view image_id) const {
  for (const auto& r : *sources_) {
    if (r.image_id == image_id) {
      return &r;
    }
  }
  return nullptr;
}

std::shared_ptr<const LoadedScene> PreviewService::scene(const SourceRecord& record) const {
  {
    std::lock_guard lock(cache_mutex_);
    if (const auto it = cache_.find(record.image_id); it != cache_.end()) {
      return it->second;
    }
  }
  const bool has_depth = record.depth_path.has_value();
  auto loaded = std::make_shared<const LoadedScene>(
      downscale_scene(load_scene(record, has_depth), options_.preview_max_edge));
  std::lock_guard lock(cache_mutex_);
  if (cache_.size() >= kSceneCacheSize) {
    cache_.clear();
  }
  cache_.emplace(record.image_id, loaded);
  return loaded;
}

HttpResponse PreviewService::list_images(int page, int size) const {
  if (!sources_) {
    return error_response(503, "no-manifest", "service started without ingested sources");
  }
  if (page < 1 || size < 1 || size > 1000) {
    return error_response(400, errc::kInvalidArgument, "page must be >= 1, size in [1, 1000]");
  }
  std::vector<const SourceRecord*> accepted;
  for (const auto& r : *sources_) {
    if (r.accepted) {
      accepted.push_back(&r);
    }
  }
  ojson images = ojson::array();
  const std::size_t begin = static_cast<std::size_t>(page - 1) * static_cast<std::size_t>(size);
  for (std::size_t i = begin; i < accepted.size() && i < begin + static_cast<std::size_t>(size);
       ++i) {
    const SourceRecord& r = *accepted[i];
    images.push_back(ojson{{"id", r.image_id},
                           {"weather", r.weather},
                           {"timeofday", r.timeofday},
                           {"has_depth", r.depth_path.has_value()},
                           {"thumbnail", fmt::format("/api/images/{}/thumbnail", r.image_id)}});
  }
  return json_response(
      200, ojson{{"page", page}, {"size", size}, {"total", accepted.size()}, {"images", images}});
}

HttpResponse PreviewService::thumbnail(std::string_view image_id) const {
  if (!sources_) {
    return error_response(503, "no-manifest", "service started without ingested sources");
  }
  const SourceRecord* r = find(image_id);
  if (r == nullptr) {
    return error_response(404, "unknown-image", fmt::format("no image '{}'", image_id));
  }
  try {
    ImageRgb img = load_image(r->image_path);
    const int edge = std::max(img.width(), img.height());
    if (edge > options_.thumbnail_max_edge) {
      const double s = static_cast<double>(options_.thumbnail_max_edge) / edge;
      img = resize_area(img, std::max(1, static_cast<int>(std::lround(img.width() * s))),
                        std::max(1, static_cast<int>(std::lround(img.height() * s))));
    }
    return png_response(encode_png(img));
  } catch (const Error& e) {
    return error_response(500, e.kind(), e.what());
  }
}

HttpResponse PreviewService::preview(std::string_view body) const {
  if (!sources_) {
    return error_response(503, "no-manifest", "service started without ingested sources");
  }
  const json req = json::parse(body, nullptr, false);
  if (req.is_discarded() || !req.is_object()) {
    return error_response(400, errc::kParse, "request body is not a JSON object");
  }
  if (!req.contains("image_id") || !req["image_id"].is_string()) {
    return error_response(422, errc::kInvalidArgument, "image_id must be a string", "image_id");
  }
  const auto family = family_or_null(req.value("family", json()));
  if (!family) {
    return error_response(422, errc::kUnknownFamily, "family is missing or unknown", "family");
  }
  std::uint64_t seed = 0;
  if (req.contains("seed")) {
    if (!req["seed"].is_number_unsigned()) {
      return error_response(422, errc::kInvalidArgument, "seed must be a non-negative integer",
                            "seed");
    }
    seed = req["seed"].get<std::uint64_t>();
  }
  const std::string image_id = req["image_id"].get<std::string>();
  const SourceRecord* record = find(image_id);
  if (record == nullptr) {
    return error_response(404, "unknown-image", fmt::format("no image '{}'", image_id));
  }
  AugSpec spec;
  spec.family = *family;
  spec.level = 0;
  spec.seed = seed;
  try {
    const ParamSet overrides = params_from_json(*family, req.value("params", json::object()));
    std::shared_lock lock(tables_mutex_);
    spec.params = merge_params(*family, tables_.row(*family, 1), overrides);
  } catch (const ParamError& e) {
    return error_response(422, e.kind(), e.reason(), e.field());
  }
  try {
    const auto s = scene(*record);
    return png_response(encode_png(augment(spec, s->view(), image_id)));
  } catch (const Error& e) {
    const int status = e.kind() == errc::kMissingDepth ? 422 : 500;
    return error_response(status, e.kind(), e.what());
  }
}

HttpResponse PreviewService::list_presets() const {
  ojson list = ojson::array();
  std::shared_lock lock(tables_mutex_);
  for (const auto& p : tables_.presets()) {
    list.push_back(preset_json(p));
  }
  return json_response(200, ojson{{"table_version", tables_.version()}, {"presets", list}});
}

HttpResponse PreviewService::save_preset(std::string_view body) {
  if (!options_.tables) {
    return error_response(503, "read-only", "service started without a tables file");
  }
  const json req = json::parse(body, nullptr, false);
  if (req.is_discarded() || !req.is_object()) {
    return error_response(400, errc::kParse, "request body is not a JSON object");
  }
  const json name = req.value("name", json());
  if (!name.is_string() || !is_valid_preset_name(name.get<std::string>())) {
    return error_response(422, errc::kInvalidArgument, "name must match [a-z0-9_]{1,64}",
                          "name");
  }
  const auto family = family_or_null(req.value("family", json()));
  if (!family) {
    return error_response(422, errc::kUnknownFamily, "family is missing or unknown", "family");
  }
  const json note = req.value("note", json(""));
  if (!note.is_string()) {
    return error_response(422, errc::kInvalidArgument, "note must be a string", "note");
  }
  Preset p;
  p.name = name.get<std::string>();
  p.family = *family;
  p.note = note.get<std::string>();
  try {
    p.params = params_from_json(*family, req.value("params", json::object()));
    validate_params(*family, p.params);
  } catch (const ParamError& e) {
    return error_response(422, e.kind(), e.reason(), e.field());
  }

  std::lock_guard file_lock(file_mutex_);
  {
    std::shared_lock lock(tables_mutex_);
    if (tables_.has_preset(p.name)) {
      return error_response(409, "duplicate-preset", fmt::format("preset '{}' exists", p.name),
                            "name");
    }
  }
  p.created_at = options_.clock();
  try {
    std::string text = read_text_file(*options_.tables);
    if (!text.empty() && text.back() != '\n') {
      text += '\n';
    }
    text += "\n" + format_preset_section(p);
    write_file_atomic(*options_.tables, text);
  } catch (const Error& e) {
    return error_response(500, e.kind(), e.what());
  }
  {
    std::unique_lock lock(tables_mutex_);
    tables_.add_preset(p);
  }
  spdlog::info("saved preset custom/{} ({})", p.name, family_name(p.family));
  return json_response(201, preset_json(p));
}

HttpResponse PreviewService::families() const {
  ojson list = ojson::array();
  std::shared_lock lock(tables_mutex_);
  for (const Family f : all_families()) {
    ojson fields = ojson::array();
    for (const FieldSpec& s : field_specs(f)) {
      fields.push_back(ojson{{"name", s.name},
                             {"kind", kind_label(s.kind)},
                             {"min", s.min},
                             {"max", s.max},
                             {"min_exclusive", s.min_exclusive},
                             {"step", s.step},
                             {"unit", s.unit},
                             {"doc", s.doc}});
    }
    ojson levels = ojson::object();
    for (int level = kMinLevel; level <= kMaxLevel; ++level) {
      levels[std::to_string(level)] = params_to_json(tables_.row(f, level));
    }
    list.push_back(ojson{{"name", family_name(f)},
                         {"needs_depth", family_needs_depth(f)},
                         {"fields", fields},
                         {"levels", levels}});
  }
  return json_response(200, ojson{{"table_version", tables_.version()}, {"families", list}});
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
  httplib::Server server;
};

namespace {

void send(httplib::Response& res, const HttpResponse& r) {
  res.status = r.status;
  for (const auto& [k, v] : r.headers) {
    res.set_header(k, v);
  }
  res.set_content(r.body, r.content_type);
}

int query_int(const httplib::Request& req, const char* key, int fallback) {
  if (!req.has_param(key)) {
    return fallback;
  }
  try {
    return std::stoi(req.get_param_value(key));
  } catch (const std::exception&) {
    return -1;
  }
}

}  // namespace

HttpServer::HttpServer(PreviewService& service, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>()) {
  auto& s = impl_->server;
  s.Get("/api/images", [&service](const httplib::Request& req, httplib::Response& res) {
    send(res, service.list_images(query_int(req, "page", 1), query_int(req, "size", 50)));
  });
  s.Get(R"(/api/images/([^/]+)/thumbnail)",
        [&service](const httplib::Request& req, httplib::Response& res) {
          send(res, service.thumbnail(req.matches[1].str()));
        });
  s.Post("/api/preview", [&service](const httplib::Request& req, httplib::Response& res) {
    send(res, service.preview(req.body));
  });
  s.Get("/api/presets", [&service](const httplib::Request&, httplib::Response& res) {
    send(res, service.list_presets());
  });
  s.Post("/api/presets", [&service](const httplib::Request& req, httplib::Response& res) {
    send(res, service.save_preset(req.body));
  });
  s.Get("/api/families", [&service](const httplib::Request&, httplib::Response& res) {
    send(res, service.families());
  });
  if (static_dir && !s.set_mount_point("/", static_dir->string())) {
    throw Error(errc::kIo, fmt::format("cannot serve static files from {}", static_dir->string()));
  }
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                              : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(errc::kIo, fmt::format("cannot bind {}:{}", host, port));
  }
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace wxforge
