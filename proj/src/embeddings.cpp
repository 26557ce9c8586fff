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

#include "wxforge/embeddings.hpp"

#include <sys/wait.h>

#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "wxforge/error.hpp"
#include "wxforge/image_io.hpp"
#include "wxforge/random.hpp"
#include "wxforge/table.hpp"
#include "wxforge/toml_lite.hpp"

static_assert(std::endian::native == std::endian::little,
              "WXE1 encoding assumes a little-endian host");
static_assert(std::numeric_limits<float>::is_iec559);

namespace wxforge {

namespace fs = std::filesystem;

extern const char* const kBuiltinSpaceTagsToml;  // generated at build time

namespace {

constexpr char kMagic[4] = {'W', 'X', 'E', '1'};

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

void put_string(std::vector<std::uint8_t>& out, std::string_view s, const char* what) {
  if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(errc::kInvalidData, fmt::format("{} longer than 65535 bytes", what));
  }
  put(out, static_cast<std::uint16_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw Error(errc::kTruncation, fmt::format("WXE1 truncated in {} at byte {} ({} of {} bytes)",
                                                 what, pos_, bytes_.size() - pos_, n));
    }
  }

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string get_string(const char* what) {
    const auto len = get<std::uint16_t>(what);
    need(len, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), len);
    pos_ += len;
    return s;
  }

  void get_floats(float* dst, std::size_t count) {
    if (count > (bytes_.size() - pos_) / sizeof(float)) {
      need(std::numeric_limits<std::size_t>::max(), "matrix");
    }
    std::memcpy(dst, bytes_.data() + pos_, count * sizeof(float));
    pos_ += count * sizeof(float);
  }

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void EmbeddingSet::validate() const {
  if (dim == 0 && n > 0) {
    throw Error(errc::kInvalidData, "embedding dim is 0");
  }
  if (data.size() != n * dim) {
    throw Error(errc::kInvalidData,
                fmt::format("embedding data has {} values, expected {}×{}", data.size(), n, dim));
  }
  if (ids.size() != n) {
    throw Error(errc::kInvalidData, fmt::format("{} ids for {} rows", ids.size(), n));
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw Error(errc::kInvalidData, fmt::format("non-finite value in row {} column {}",
                                                  i / dim, i % dim));
    }
  }
  std::set<std::string_view> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      throw Error(errc::kInvalidData, fmt::format("duplicate embedding id '{}'", id));
    }
  }
}

std::uint64_t EmbeddingSet::content_hash() const noexcept {
  std::uint64_t h = fnv1a64(space_tag);
  h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&dim), sizeof(dim)), h);
  h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&n), sizeof(n)), h);
  return fnv1a64(std::string_view(reinterpret_cast<const char*>(data.data()),
                                  data.size() * sizeof(float)),
                 h);
}

std::vector<std::uint8_t> encode_embeddings(const EmbeddingSet& set) {
  set.validate();
  if (set.dim > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(errc::kInvalidData, "embedding dim exceeds u32");
  }
  std::vector<std::uint8_t> out;
  out.reserve(22 + set.space_tag.size() + set.data.size() * sizeof(float) + set.n * 18);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put(out, kWxeVersion);
  put(out, static_cast<std::uint32_t>(set.dim));
  put(out, static_cast<std::uint64_t>(set.n));
  put_string(out, set.space_tag, "space tag");
  const auto* p = reinterpret_cast<const std::uint8_t*>(set.data.data());
  out.insert(out.end(), p, p + set.data.size() * sizeof(float));
  for (const auto& id : set.ids) {
    put_string(out, id, "embedding id");
  }
  return out;
}

EmbeddingSet decode_embeddings(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.need(4, "magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(errc::kFormat, "not a WXE1 file (bad magic)");
  }
  (void)r.get<std::uint32_t>("magic");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kWxeVersion) {
    throw Error(errc::kFormat, fmt::format("unsupported WXE1 version {}", version));
  }
  EmbeddingSet set;
  set.dim = r.get<std::uint32_t>("dim");
  const auto n = r.get<std::uint64_t>("n");
  set.space_tag = r.get_string("space tag");
  if (set.dim == 0 && n > 0) {
    throw Error(errc::kFormat, "WXE1 declares rows of dimension 0");
  }
  if (set.dim > 0 && n > r.remaining() / (set.dim * sizeof(float))) {
    throw Error(errc::kTruncation,
                fmt::format("WXE1 truncated in matrix: {} rows of {} floats declared", n, set.dim));
  }
  set.n = static_cast<std::size_t>(n);
  set.data.resize(set.n * set.dim);
  r.get_floats(set.data.data(), set.data.size());
  set.ids.reserve(set.n);
  for (std::size_t i = 0; i < set.n; ++i) {
    set.ids.push_back(r.get_string("ids"));
  }
  if (r.remaining() != 0) {
    throw Error(errc::kFormat, fmt::format("{} trailing bytes after WXE1 payload", r.remaining()));
  }
  set.validate();
  return set;
}

void write_embeddings(const EmbeddingSet& set, const fs::path& path) {
  const auto bytes = encode_embeddings(set);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                           bytes.size()));
}

EmbeddingSet read_embeddings(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  return decode_embeddings(bytes);
}

void l2_normalize_rows(EmbeddingSet& set) {
  for (std::size_t i = 0; i < set.n; ++i) {
    double ss = 0.0;
    for (std::size_t j = 0; j < set.dim; ++j) {
      const double v = set.data[i * set.dim + j];
      ss += v * v;
    }
    if (ss <= 0.0) {
      continue;
    }
    const double inv = 1.0 / std::sqrt(ss);
    for (std::size_t j = 0; j < set.dim; ++j) {
      set.data[i * set.dim + j] = static_cast<float>(set.data[i * set.dim + j] * inv);
    }
  }
}

// ---------------------------------------------------------------------------

const SpaceTagRegistry& SpaceTagRegistry::builtin() {
  static const SpaceTagRegistry reg = parse(kBuiltinSpaceTagsToml, "<builtin space tags>");
  return reg;
}

SpaceTagRegistry SpaceTagRegistry::parse(std::string_view text, std::string_view source) {
  const toml::Document doc = toml::parse(text, source);
  SpaceTagRegistry reg;
  for (const auto& t : doc.tables) {
    const auto dim = t.number("dim");
    if (!dim || *dim < 1 || std::floor(*dim) != *dim) {
      throw Error(errc::kParse,
                  fmt::format("{}:{}: [{}] needs a positive integer dim", source, t.line, t.name));
    }
    reg.tags_.push_back(SpaceTag{t.name, static_cast<std::size_t>(*dim),
                                 t.boolean("normalize").value_or(false)});
  }
  return reg;
}

SpaceTagRegistry SpaceTagRegistry::load(const fs::path& path) {
  return parse(read_text_file(path), path.string());
}

const SpaceTag* SpaceTagRegistry::find(std::string_view tag) const noexcept {
  for (const auto& t : tags_) {
    if (t.tag == tag) {
      return &t;
    }
  }
  return nullptr;
}

void SpaceTagRegistry::check(const EmbeddingSet& set) const {
  const SpaceTag* t = find(set.space_tag);
  if (t == nullptr) {
    spdlog::warn("embedding space '{}' is not registered; dim is unchecked", set.space_tag);
    return;
  }
  if (t->dim != set.dim) {
    throw Error(errc::kFormat, fmt::format("space '{}' is registered with dim {}, file has {}",
                                           set.space_tag, t->dim, set.dim));
  }
}

EmbeddingSet load_embeddings(const fs::path& path, const SpaceTagRegistry& registry) {
  EmbeddingSet set = read_embeddings(path);
  registry.check(set);
  if (const SpaceTag* t = registry.find(set.space_tag); t != nullptr && t->normalize) {
    l2_normalize_rows(set);
  }
  return set;
}

std::string shell_quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

EmbeddingSet run_extractor(std::string_view command_template,
                           std::span<const std::string> image_paths, const fs::path& out_path,
                           const SpaceTagRegistry& registry) {
  if (command_template.find("{input_list}") == std::string_view::npos ||
      command_template.find("{output}") == std::string_view::npos) {
    throw Error(errc::kInvalidArgument,
                "extractor command must contain {input_list} and {output} placeholders");
  }
  fs::path list_path = out_path;
  list_path += ".images.txt";
  fs::path err_path = out_path;
  err_path += ".stderr.txt";
  std::string listing;
  for (const auto& p : image_paths) {
    listing += p;
    listing += '\n';
  }
  write_file_atomic(list_path, listing);

  std::string cmd(command_template);
  auto substitute = [&cmd](std::string_view key, const std::string& value) {
    for (auto pos = cmd.find(key); pos != std::string::npos; pos = cmd.find(key, pos)) {
      cmd.replace(pos, key.size(), value);
      pos += value.size();
    }
  };
  substitute("{input_list}", shell_quote(list_path.string()));
  substitute("{output}", shell_quote(out_path.string()));
  // Group the whole template so every command's stderr is captured.
  cmd = "{ " + cmd + "\n} 2>" + shell_quote(err_path.string());

  spdlog::debug("running extractor: {}", cmd);
  const int status = std::system(cmd.c_str());
  std::string stderr_text;
  {
    std::error_code ec;
    if (fs::exists(err_path, ec)) {
      stderr_text = read_text_file(err_path);
      fs::remove(err_path, ec);
    }
  }
  const int code = status == -1 ? -1 : (WIFEXITED(status) ? WEXITSTATUS(status) : 128);
  if (code != 0) {
    while (!stderr_text.empty() && (stderr_text.back() == '\n' || stderr_text.back() == '\r')) {
      stderr_text.pop_back();
    }
    throw Error(errc::kProcessFailure,
                fmt::format("extractor exited with status {}: {}", code, stderr_text));
  }
  std::error_code ec;
  if (!fs::exists(out_path, ec)) {
    throw Error(errc::kFormat, fmt::format("extractor wrote no output at {}", out_path.string()));
  }
  EmbeddingSet set = load_embeddings(out_path, registry);
  if (set.n != image_paths.size()) {
    throw Error(errc::kFormat, fmt::format("extractor returned {} rows for {} images", set.n,
                                           image_paths.size()));
  }
  return set;
}

}  // namespace wxforge
