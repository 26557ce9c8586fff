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

// Augmentation families, their parameter schemas, and the intensity tables
// that name parameter rows as levels 1..5.
//
// A ParamSet is the schema-checked, untyped form used by the tables, the
// preview service and the CLI. Each family's typed record is built from a
// validated ParamSet, so a field exists in exactly one place: its FieldSpec.

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "wxforge/error.hpp"
#include "wxforge/imagecore.hpp"
#include "wxforge/toml_lite.hpp"

namespace wxforge {

enum class Family {
  kOvercast,
  kDenseFog,
  kShadowSunglare,
  kRainStreaks,
  kWetStreetLensDroplets,
  kPuddles,
  kRainComposition,
};

inline constexpr int kMinLevel = 1;
inline constexpr int kMaxLevel = 5;

std::string_view family_name(Family f) noexcept;
/// Throws unknown-family.
Family parse_family(std::string_view name);
std::span<const Family> all_families() noexcept;

struct Range {
  double lo = 0;
  double hi = 0;
  friend bool operator==(const Range&, const Range&) = default;
};

using ParamValue = std::variant<double, Rgb, Range>;
using ParamSet = std::map<std::string, ParamValue, std::less<>>;

enum class FieldKind { kReal, kCount, kRgb, kRange };

struct FieldSpec {
  std::string_view name;
  FieldKind kind;
  double min;
  double max;
  bool min_exclusive;
  double step;  ///< UI slider granularity
  std::string_view unit;
  std::string_view doc;
};

/// Field schema of a family, in display order.
std::span<const FieldSpec> field_specs(Family f) noexcept;

/// invalid-params naming the first offending field.
class ParamError : public Error {
 public:
  ParamError(std::string field, std::string reason);
  const std::string& field() const noexcept { return field_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string field_;
  std::string reason_;
};

/// Requires every schema field to be present, in range and of the right
/// kind, and no unknown fields. Throws ParamError.
void validate_params(Family f, const ParamSet& params);

/// Copies `overrides` onto `base` field by field, then validates.
ParamSet merge_params(Family f, const ParamSet& base, const ParamSet& overrides);

nlohmann::json params_to_json(const ParamSet& params);
/// Numbers, [r,g,b] arrays and [lo,hi] arrays are typed by the schema.
/// Unknown fields and type errors throw ParamError; missing fields are left
/// absent so the result can serve as a partial override.
ParamSet params_from_json(Family f, const nlohmann::json& j);
ParamSet params_from_toml(Family f, const toml::Table& table);
std::vector<toml::Entry> params_to_toml(Family f, const ParamSet& params);

// ---------------------------------------------------------------------------
// Typed records

inline constexpr Rgb kDefaultSkyGray = {178.0, 180.0, 184.0};

struct OvercastParams {
  double amount = 0;
  Rgb sky_gray = kDefaultSkyGray;
  double sky_weight = 0;
  static OvercastParams from(const ParamSet& p);
};

struct FogParams {
  double beta = 0.0065;
  Rgb airlight = {200.0, 200.0, 200.0};
  double blur_sigma_max = 0;
  double overcast_amount = 0;
  static FogParams from(const ParamSet& p);
};

struct SunParams {
  double elevation = 0.7;
  double glare_sigma = 0;
  double glare_gain = 0;
  double saturation_boost = 0;
  double shadow_strength = 0;
  static SunParams from(const ParamSet& p);
};

struct RainStreakParams {
  double count = 0;  ///< streaks per megapixel
  Range length_px = {8.0, 16.0};
  double angle = 0;  ///< mean, radians from vertical
  double angle_jitter = 0;
  double alpha = 0;
  Rgb streak_color = {220.0, 220.0, 225.0};
  static RainStreakParams from(const ParamSet& p);
};

struct ReflectionParams {
  double reflectivity = 0;
  double roughness_blur = 0;
  int droplet_count = 0;
  Range droplet_radius_px = {4.0, 8.0};
  double droplet_alpha = 0;
  static ReflectionParams from(const ParamSet& p);
};

struct PuddleParams {
  double noise_frequency = 0.02;
  double threshold = 1.0;
  double reflectivity = 0;
  static PuddleParams from(const ParamSet& p);
};

struct RainCompositionParams {
  double overcast_amount = 0;
  ReflectionParams reflection;
  FogParams fog;  ///< beta 0 disables the fog stage
  RainStreakParams streaks;
  static RainCompositionParams from(const ParamSet& p);
};

/// Overcast strength shared by the non-overcast families, 0 when absent.
double overcast_amount_of(const ParamSet& p);

// ---------------------------------------------------------------------------
// Intensity tables

/// A named custom row of the tables (`[custom.<name>]`).
struct Preset {
  std::string name;
  Family family;
  ParamSet params;
  std::string note;
  std::string created_at;  ///< ISO-8601 UTC, empty when unknown
};

/// Versioned parameter tables: one row per family × level plus optional
/// custom presets. The default tables ship inside the library and can be
/// replaced by a file with the same layout.
class IntensityTables {
 public:
  /// The tables compiled into the library.
  static const IntensityTables& builtin();
  static IntensityTables parse(std::string_view text, std::string_view source = "<tables>");
  static IntensityTables load(const std::filesystem::path& path);

  const std::string& version() const noexcept { return version_; }

  /// Errors: level-out-of-range.
  const ParamSet& row(Family f, int level) const;
  /// Errors: unknown-preset.
  const Preset& preset(std::string_view name) const;
  bool has_preset(std::string_view name) const noexcept;
  const std::vector<Preset>& presets() const noexcept { return presets_; }

  /// Replaces a level row after validation.
  void set_row(Family f, int level, ParamSet params);
  void add_preset(Preset p);

  /// Serializes back to the file layout.
  std::string to_toml() const;

 private:
  std::string version_;
  std::map<Family, std::array<ParamSet, kMaxLevel>> rows_;
  std::vector<Preset> presets_;
};

/// The TOML section for one preset, suitable for appending to a tables
/// file.
std::string format_preset_section(const Preset& p);

/// Valid preset names: [a-z0-9_]{1,64}.
bool is_valid_preset_name(std::string_view name) noexcept;

/// Row of the built-in tables. Errors: unknown-family, level-out-of-range.
ParamSet resolve_intensity(std::string_view family, int level);
ParamSet resolve_intensity(Family family, int level);

/// Family, level-or-preset, resolved params and seed of one augmentation.
struct AugSpec {
  Family family = Family::kOvercast;
  int level = 1;
  std::optional<std::string> preset;  ///< set when params came from a preset
  ParamSet params;
  std::uint64_t seed = 0;

  /// "<family>_<level>", or "<family>_custom_<preset>" for presets.
  std::string subset_name() const;

  static AugSpec from_level(Family f, int level, std::uint64_t seed,
                            const IntensityTables& tables = IntensityTables::builtin());
  /// Errors: unknown-preset. `name` may carry a "custom/" prefix.
  static AugSpec from_preset(std::string_view name, std::uint64_t seed,
                             const IntensityTables& tables = IntensityTables::builtin());
};

}  // namespace wxforge
