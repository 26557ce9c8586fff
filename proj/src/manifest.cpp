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

#include "wxforge/manifest.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "wxforge/error.hpp"
#include "wxforge/random.hpp"
#include "wxforge/table.hpp"

namespace wxforge {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::optional<fs::path> first_existing(std::initializer_list<fs::path> candidates) {
  for (const auto& p : candidates) {
    std::error_code ec;
    if (fs::is_regular_file(p, ec)) {
      return p;
    }
  }
  return std::nullopt;
}

std::string attribute(const nlohmann::json& item, const char* key) {
  const auto attrs = item.find("attributes");
  if (attrs == item.end() || !attrs->is_object()) {
    return "undefined";
  }
  const auto v = attrs->find(key);
  if (v == attrs->end() || !v->is_string()) {
    return "undefined";
  }
  return v->get<std::string>();
}

std::vector<BBox> boxes_of(const nlohmann::json& item, std::size_t index,
                           const fs::path& source) {
  std::vector<BBox> out;
  const auto labels = item.find("labels");
  if (labels == item.end() || labels->is_null()) {
    return out;
  }
  if (!labels->is_array()) {
    throw Error(errc::kParse, fmt::format("{}: entry {}: labels must be an array",
                                          source.string(), index));
  }
  for (const auto& label : *labels) {
    const auto box = label.find("box2d");
    if (box == label.end() || !box->is_object()) {
      continue;
    }
    try {
      out.push_back(BBox{box->at("x1").get<double>(), box->at("y1").get<double>(),
                         box->at("x2").get<double>(), box->at("y2").get<double>(),
                         label.value("category", std::string())});
    } catch (const nlohmann::json::exception& e) {
      throw Error(errc::kParse,
                  fmt::format("{}: entry {}: bad box2d: {}", source.string(), index, e.what()));
    }
  }
  return out;
}

std::map<std::string, std::string> read_exclusions(const fs::path& path) {
  std::map<std::string, std::string> out;
  const std::string text = read_text_file(path);
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) {
      end = text.size();
    }
    std::string line = text.substr(start, end - start);
    start = end + 1;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
      continue;
    }
    const auto id_end = line.find_first_of(" \t\r", first);
    const std::string id = line.substr(first, id_end - first);
    std::string reason;
    if (id_end != std::string::npos) {
      const auto r0 = line.find_first_not_of(" \t", id_end);
      if (r0 != std::string::npos) {
        reason = line.substr(r0);
        while (!reason.empty() && (reason.back() == ' ' || reason.back() == '\r')) {
          reason.pop_back();
        }
      }
    }
    out[id] = reason.empty() ? "excluded" : reason;
  }
  return out;
}

std::string path_string(const fs::path& p) { return p.generic_string(); }

ojson box_json(const BBox& b) {
  return ojson{{"category", b.category}, {"x1", b.x1}, {"y1", b.y1}, {"x2", b.x2}, {"y2", b.y2}};
}

template <typename J>
const J& require(const J& obj, const char* key, std::string_view what) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(errc::kParse, fmt::format("{}: missing key '{}'", what, key));
  }
  return *it;
}

}  // namespace

IngestResult ingest(const IngestOptions& options) {
  const std::string text = read_text_file(options.attributes_file);
  IngestResult result;
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    return result;
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(errc::kParse, fmt::format("{}: offset {}: {}", options.attributes_file.string(),
                                          e.byte, e.what()));
  }
  if (!doc.is_array()) {
    throw Error(errc::kParse, fmt::format("{}: expected a JSON array of images",
                                          options.attributes_file.string()));
  }
  std::map<std::string, std::string> excluded;
  if (options.exclusion_list) {
    excluded = read_exclusions(*options.exclusion_list);
  }

  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    const auto name_it = item.find("name");
    if (!item.is_object() || name_it == item.end() || !name_it->is_string()) {
      throw Error(errc::kParse, fmt::format("{}: entry {}: missing string 'name'",
                                            options.attributes_file.string(), i));
    }
    const std::string name = name_it->get<std::string>();
    const std::string id = fs::path(name).stem().string();
    if (!seen.insert(id).second) {
      throw Error(errc::kParse, fmt::format("{}: entry {}: duplicate image_id '{}'",
                                            options.attributes_file.string(), i, id));
    }
    SourceRecord rec;
    rec.image_id = id;
    rec.weather = attribute(item, "weather");
    rec.timeofday = attribute(item, "timeofday");
    rec.boxes = boxes_of(item, i, options.attributes_file);
    rec.boxes_path = options.attributes_file;

    const auto seg = first_existing(
        {options.seg_dir / (id + "_train_id.png"), options.seg_dir / (id + ".png")});
    if (!seg) {
      ++result.dropped["no-seg"];
      continue;
    }
    const auto image = first_existing({options.image_dir / name, options.image_dir / (id + ".jpg"),
                                       options.image_dir / (id + ".png")});
    if (!image) {
      ++result.dropped["no-image"];
      continue;
    }
    rec.seg_path = *seg;
    rec.image_path = *image;
    if (options.depth_dir) {
      rec.depth_path = first_existing({*options.depth_dir / (id + ".png")});
    }
    if (const auto ex = excluded.find(id); ex != excluded.end()) {
      rec.accepted = false;
      rec.reject_reason = ex->second;
    }
    result.records.push_back(std::move(rec));
  }
  std::sort(result.records.begin(), result.records.end(),
            [](const SourceRecord& a, const SourceRecord& b) { return a.image_id < b.image_id; });
  for (const auto& [reason, count] : result.dropped) {
    spdlog::info("ingest dropped {} image(s): {}", count, reason);
  }
  return result;
}

std::vector<SourceRecord> filter_candidates(std::span<const SourceRecord> records,
                                            const std::set<std::string>& allowed_weather,
                                            const std::set<std::string>& allowed_timeofday) {
  std::vector<SourceRecord> out;
  for (const auto& r : records) {
    if (allowed_weather.contains(r.weather) && allowed_timeofday.contains(r.timeofday)) {
      out.push_back(r);
    }
  }
  return out;
}

std::vector<SourceRecord> default_candidates(std::span<const SourceRecord> records) {
  return filter_candidates(records, {"clear", "overcast"}, {"daytime"});
}

std::string sources_to_json(std::span<const SourceRecord> records) {
  ojson arr = ojson::array();
  for (const auto& r : records) {
    ojson boxes = ojson::array();
    for (const auto& b : r.boxes) {
      boxes.push_back(box_json(b));
    }
    arr.push_back(ojson{
        {"image_id", r.image_id},
        {"image", path_string(r.image_path)},
        {"seg", path_string(r.seg_path)},
        {"boxes_path", path_string(r.boxes_path)},
        {"depth", r.depth_path ? ojson(path_string(*r.depth_path)) : ojson(nullptr)},
        {"weather", r.weather},
        {"timeofday", r.timeofday},
        {"accepted", r.accepted},
        {"reject_reason", r.reject_reason},
        {"boxes", std::move(boxes)},
    });
  }
  return arr.dump(2) + "\n";
}

std::vector<SourceRecord> sources_from_json(std::string_view text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(errc::kParse, fmt::format("sources: offset {}: {}", e.byte, e.what()));
  }
  if (!doc.is_array()) {
    throw Error(errc::kParse, "sources: expected a JSON array");
  }
  std::vector<SourceRecord> out;
  try {
    for (const auto& j : doc) {
      SourceRecord r;
      r.image_id = require(j, "image_id", "source record").template get<std::string>();
      r.image_path = require(j, "image", r.image_id).template get<std::string>();
      r.seg_path = require(j, "seg", r.image_id).template get<std::string>();
      r.boxes_path = j.value("boxes_path", std::string());
      if (j.contains("depth") && !j["depth"].is_null()) {
        r.depth_path = fs::path(j["depth"].template get<std::string>());
      }
      r.weather = j.value("weather", std::string("undefined"));
      r.timeofday = j.value("timeofday", std::string("undefined"));
      r.accepted = j.value("accepted", true);
      r.reject_reason = j.value("reject_reason", std::string());
      if (j.contains("boxes")) {
        for (const auto& b : j["boxes"]) {
          r.boxes.push_back(BBox{b.at("x1").template get<double>(), b.at("y1").template get<double>(),
                                 b.at("x2").template get<double>(), b.at("y2").template get<double>(),
                                 b.value("category", std::string())});
        }
      }
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::kParse, fmt::format("sources: {}", e.what()));
  }
  return out;
}

void write_sources(std::span<const SourceRecord> records, const fs::path& path) {
  write_file_atomic(path, sources_to_json(records));
}

std::vector<SourceRecord> read_sources(const fs::path& path) {
  return sources_from_json(read_text_file(path));
}

// ---------------------------------------------------------------------------

std::uint64_t entry_seed(std::uint64_t seed_base, std::string_view image_id) {
  return mix_seed(seed_base, image_id);
}

AugSpec AugManifest::spec_for(const ManifestEntry& e) const {
  return AugSpec{family, level, preset, params, e.seed};
}

AugManifest build_manifest(std::span<const SourceRecord> records, const AugSpec& spec,
                           std::uint64_t seed_base, const fs::path& out_dir,
                           const IntensityTables& tables) {
  validate_params(spec.family, spec.params);
  AugManifest m;
  m.family = spec.family;
  m.level = spec.preset ? 0 : spec.level;
  m.preset = spec.preset;
  m.params = spec.params;
  m.seed_base = seed_base;
  m.table_version = tables.version();
  m.subset_name = spec.subset_name();
  for (const auto& r : records) {
    if (!r.accepted) {
      continue;
    }
    for (const fs::path* label : {&r.seg_path, &r.boxes_path}) {
      std::error_code ec;
      if (!fs::is_regular_file(*label, ec)) {
        throw Error(errc::kMissingLabel,
                    fmt::format("{}: label file {} does not exist", r.image_id, label->string()));
      }
    }
    if (r.depth_path) {
      std::error_code ec;
      if (!fs::is_regular_file(*r.depth_path, ec)) {
        throw Error(errc::kMissingLabel, fmt::format("{}: depth file {} does not exist",
                                                     r.image_id, r.depth_path->string()));
      }
    }
    m.entries.push_back(ManifestEntry{r.image_id, r.image_path,
                                      out_dir / m.subset_name / (r.image_id + ".png"),
                                      entry_seed(seed_base, r.image_id), r.seg_path, r.boxes_path,
                                      r.depth_path});
  }
  if (m.entries.empty()) {
    throw Error(errc::kEmptyInput, "no accepted source records to build a manifest from");
  }
  return m;
}

std::string manifest_to_json(const AugManifest& m) {
  ojson params(ojson::object());
  const nlohmann::json pj = params_to_json(m.params);
  for (const auto& s : field_specs(m.family)) {
    if (pj.contains(s.name)) {
      params[std::string(s.name)] = pj[std::string(s.name)];
    }
  }
  ojson entries = ojson::array();
  for (const auto& e : m.entries) {
    entries.push_back(ojson{
        {"image_id", e.image_id},
        {"source_image", path_string(e.source_image)},
        {"output", path_string(e.output)},
        {"spec",
         ojson{{"family", std::string(family_name(m.family))},
               {"level", m.level},
               {"preset", m.preset ? ojson(*m.preset) : ojson(nullptr)},
               {"seed", e.seed}}},
        {"labels",
         ojson{{"seg", path_string(e.seg_path)},
               {"boxes", path_string(e.boxes_path)},
               {"depth", e.depth_path ? ojson(path_string(*e.depth_path)) : ojson(nullptr)}}},
    });
  }
  const ojson doc{
      {"subset_name", m.subset_name},
      {"family", std::string(family_name(m.family))},
      {"level", m.level},
      {"preset", m.preset ? ojson(*m.preset) : ojson(nullptr)},
      {"params", std::move(params)},
      {"seed_base", m.seed_base},
      {"tool_version", m.tool_version},
      {"table_version", m.table_version},
      {"entries", std::move(entries)},
  };
  return doc.dump(2) + "\n";
}

AugManifest manifest_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(errc::kParse, fmt::format("manifest: offset {}: {}", e.byte, e.what()));
  }
  AugManifest m;
  try {
    m.subset_name = require(doc, "subset_name", "manifest").get<std::string>();
    m.family = parse_family(require(doc, "family", "manifest").get<std::string>());
    m.level = require(doc, "level", "manifest").get<int>();
    if (doc.contains("preset") && !doc["preset"].is_null()) {
      m.preset = doc["preset"].get<std::string>();
    }
    m.params = params_from_json(m.family, require(doc, "params", "manifest"));
    m.seed_base = require(doc, "seed_base", "manifest").get<std::uint64_t>();
    m.tool_version = doc.value("tool_version", std::string());
    m.table_version = doc.value("table_version", std::string());
    for (const auto& e : require(doc, "entries", "manifest")) {
      ManifestEntry entry;
      entry.image_id = e.at("image_id").get<std::string>();
      entry.source_image = e.at("source_image").get<std::string>();
      entry.output = e.at("output").get<std::string>();
      const auto& spec = e.at("spec");
      entry.seed = spec.at("seed").get<std::uint64_t>();
      if (spec.at("family").get<std::string>() != family_name(m.family) ||
          spec.at("level").get<int>() != m.level) {
        throw Error(errc::kParse,
                    fmt::format("manifest entry {} disagrees with the subset", entry.image_id));
      }
      const auto& labels = e.at("labels");
      entry.seg_path = labels.at("seg").get<std::string>();
      entry.boxes_path = labels.at("boxes").get<std::string>();
      if (labels.contains("depth") && !labels["depth"].is_null()) {
        entry.depth_path = fs::path(labels["depth"].get<std::string>());
      }
      m.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::kParse, fmt::format("manifest: {}", e.what()));
  }
  validate_params(m.family, m.params);
  const AugSpec probe{m.family, m.level, m.preset, m.params, 0};
  if (probe.subset_name() != m.subset_name) {
    throw Error(errc::kParse, fmt::format("manifest subset_name '{}' does not match {}",
                                          m.subset_name, probe.subset_name()));
  }
  return m;
}

void write_manifest(const AugManifest& m, const fs::path& path) {
  write_file_atomic(path, manifest_to_json(m));
}

AugManifest read_manifest(const fs::path& path) {
  return manifest_from_json(read_text_file(path));
}

}  // namespace wxforge
