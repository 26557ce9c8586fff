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

// Embedding sets and the WXE1 file format.
//
// WXE1 layout, all integers little-endian:
//
//   "WXE1"                     4 bytes
//   version = 1                u32
//   dim                        u32
//   n                          u64
//   space_tag                  u16 byte length + UTF-8
//   data                       n·dim float32, row-major
//   ids                        n × (u16 byte length + UTF-8)
//
// Feature extraction runs out of process: an extractor command receives a
// file listing image paths and must write a WXE1 file.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wxforge {

inline constexpr std::uint32_t kWxeVersion = 1;

struct EmbeddingSet {
  std::size_t dim = 0;
  std::size_t n = 0;
  std::vector<float> data;  ///< n × dim, row-major
  std::vector<std::string> ids;
  std::string space_tag;

  std::span<const float> row(std::size_t i) const noexcept {
    return {data.data() + i * dim, dim};
  }

  /// Shape, finiteness and id uniqueness. Errors: invalid-data.
  void validate() const;
  /// FNV-1a over tag, shape and data bytes.
  std::uint64_t content_hash() const noexcept;

  friend bool operator==(const EmbeddingSet&, const EmbeddingSet&) = default;
};

/// Errors: invalid-data.
std::vector<std::uint8_t> encode_embeddings(const EmbeddingSet& set);
/// Errors: format-error, truncation-error, invalid-data.
EmbeddingSet decode_embeddings(std::span<const std::uint8_t> bytes);

/// Errors: invalid-data, io-error.
void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path);
/// Errors: io-error plus those of decode_embeddings.
EmbeddingSet read_embeddings(const std::filesystem::path& path);

/// Scales every row to unit L2 norm; zero rows are left as they are.
void l2_normalize_rows(EmbeddingSet& set);

// ---------------------------------------------------------------------------

struct SpaceTag {
  std::string tag;
  std::size_t dim = 0;
  bool normalize = false;  ///< L2-normalize rows at load
};

/// Known embedding spaces. The default registry ships with the library and
/// lists the Inception pool3 and CLIP image spaces.
class SpaceTagRegistry {
 public:
  static const SpaceTagRegistry& builtin();
  /// `[<tag>]` sections with `dim` and optional `normalize`.
  static SpaceTagRegistry parse(std::string_view text, std::string_view source = "<registry>");
  static SpaceTagRegistry load(const std::filesystem::path& path);

  const SpaceTag* find(std::string_view tag) const noexcept;
  const std::vector<SpaceTag>& tags() const noexcept { return tags_; }

  /// Format-error when the set's tag is registered with another dim.
  void check(const EmbeddingSet& set) const;

 private:
  std::vector<SpaceTag> tags_;
};

/// The canonical tags of the two metric spaces.
inline constexpr const char* kInceptionSpace = "inception-pool3";
inline constexpr const char* kClipSpace = "clip-image";

/// read_embeddings, then the registry check and its normalization flag.
EmbeddingSet load_embeddings(const std::filesystem::path& path,
                             const SpaceTagRegistry& registry = SpaceTagRegistry::builtin());

/// Writes the image list next to `out_path`, substitutes the shell-quoted
/// list and output paths for `{input_list}` and `{output}` in
/// `command_template`, runs it through /bin/sh and loads the result.
/// Errors: invalid-argument (placeholders missing), process-failure
/// (non-zero exit, message carries stderr), format-error.
EmbeddingSet run_extractor(std::string_view command_template,
                           std::span<const std::string> image_paths,
                           const std::filesystem::path& out_path,
                           const SpaceTagRegistry& registry = SpaceTagRegistry::builtin());

/// POSIX shell single-quoting.
std::string shell_quote(std::string_view s);

}  // namespace wxforge
