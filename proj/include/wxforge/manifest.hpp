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

// Source ingestion and augmentation manifests.
//
// Ingest reads a BDD-style detection label file (a JSON array of
// {name, attributes{weather, timeofday}, labels[{category, box2d}]}),
// keeps images that also have a segmentation label, and attaches boxes and
// attributes. Records are sorted by image id, so input ordering never
// affects outputs.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "wxforge/imagecore.hpp"
#include "wxforge/params.hpp"

namespace wxforge {

inline constexpr const char* kToolVersion = "0.1.0";

struct SourceRecord {
  std::string image_id;
  std::filesystem::path image_path;
  std::filesystem::path seg_path;
  std::filesystem::path boxes_path;  ///< file the boxes were read from
  std::optional<std::filesystem::path> depth_path;
  std::string weather;
  std::string timeofday;
  std::vector<BBox> boxes;
  bool accepted = true;
  std::string reject_reason;  ///< set when !accepted

  friend bool operator==(const SourceRecord&, const SourceRecord&) = default;
};

struct IngestOptions {
  std::filesystem::path attributes_file;
  std::filesystem::path seg_dir;
  std::filesystem::path image_dir;
  std::optional<std::filesystem::path> depth_dir;
  /// Lines of "<image_id> <free-form reason>"; '#' starts a comment.
  std::optional<std::filesystem::path> exclusion_list;
};

struct IngestResult {
  std::vector<SourceRecord> records;  ///< sorted by image_id
  std::map<std::string, std::size_t> dropped;  ///< reason -> count
};

/// Errors: io-error, parse-error (with offset or entry index).
IngestResult ingest(const IngestOptions& options);

/// Records whose weather and time of day are both allowed; order kept.
std::vector<SourceRecord> filter_candidates(std::span<const SourceRecord> records,
                                            const std::set<std::string>& allowed_weather,
                                            const std::set<std::string>& allowed_timeofday);

/// The source selection used for the published subsets: clear or overcast
/// weather at daytime.
std::vector<SourceRecord> default_candidates(std::span<const SourceRecord> records);

std::string sources_to_json(std::span<const SourceRecord> records);
std::vector<SourceRecord> sources_from_json(std::string_view text);
void write_sources(std::span<const SourceRecord> records, const std::filesystem::path& path);
std::vector<SourceRecord> read_sources(const std::filesystem::path& path);

// ---------------------------------------------------------------------------

struct ManifestEntry {
  std::string image_id;
  std::filesystem::path source_image;
  std::filesystem::path output;
  std::uint64_t seed = 0;
  std::filesystem::path seg_path;
  std::filesystem::path boxes_path;
  std::optional<std::filesystem::path> depth_path;
};

struct AugManifest {
  std::string subset_name;
  Family family = Family::kOvercast;
  int level = 0;  ///< 0 for presets
  std::optional<std::string> preset;
  ParamSet params;
  std::uint64_t seed_base = 0;
  std::string tool_version = kToolVersion;
  std::string table_version;
  std::vector<ManifestEntry> entries;

  AugSpec spec_for(const ManifestEntry& e) const;
};

/// Per-entry seed: mix_seed(seed_base, image_id).
std::uint64_t entry_seed(std::uint64_t seed_base, std::string_view image_id);

/// One entry per accepted record, writing to `out_dir/<subset>/<id>.png`.
/// `spec.seed` is ignored. Every inherited label path must exist.
/// Errors: empty-input, missing-label.
AugManifest build_manifest(std::span<const SourceRecord> records, const AugSpec& spec,
                           std::uint64_t seed_base, const std::filesystem::path& out_dir,
                           const IntensityTables& tables = IntensityTables::builtin());

/// Stable key order, two-space indent, trailing newline.
std::string manifest_to_json(const AugManifest& m);
/// Errors: parse-error, invalid-params.
AugManifest manifest_from_json(std::string_view text);
void write_manifest(const AugManifest& m, const std::filesystem::path& path);
AugManifest read_manifest(const std::filesystem::path& path);

}  // namespace wxforge
