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

#include "wxforge/params.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace wxforge {

extern const char* const kBuiltinTablesToml;  // generated at build time

namespace {

using K = FieldKind;

constexpr FieldSpec kOvercastAmount{"overcast_amount", K::kReal, 0, 1, false, 0.01, "",
                                    "global desaturation applied first"};

constexpr std::array kOvercastFields = {
    FieldSpec{"amount", K::kReal, 0, 1, false, 0.01, "", "global desaturation"},
    FieldSpec{"sky_gray", K::kRgb, 0, 255, false, 1, "", "target color of sky pixels"},
    FieldSpec{"sky_weight", K::kReal, 0, 1, false, 0.01, "", "blend weight toward sky_gray"},
};

constexpr std::array kFogFields = {
    FieldSpec{"beta", K::kReal, 0, 1, true, 0.0005, "1/m", "extinction coefficient"},
    FieldSpec{"airlight", K::kRgb, 0, 255, false, 1, "", "atmospheric light color"},
    FieldSpec{"blur_sigma_max", K::kReal, 0, 20, false, 0.1, "px", "blur at zero transmittance"},
    kOvercastAmount,
};

constexpr std::array kSunFields = {
    FieldSpec{"elevation", K::kReal, 0.05, 1.5, false, 0.01, "rad", "sun elevation"},
    FieldSpec{"glare_sigma", K::kReal, 0, 2000, false, 1, "px", "radial glare spread"},
    FieldSpec{"glare_gain", K::kReal, 0, 1, false, 0.01, "", "glare screen-blend strength"},
    FieldSpec{"saturation_boost", K::kReal, 0, 1, false, 0.01, "", "global saturation increase"},
    FieldSpec{"shadow_strength", K::kReal, 0, 1, false, 0.01, "", "road darkening under shadows"},
};

constexpr std::array kStreakFields = {
    FieldSpec{"count", K::kReal, 0, 20000, false, 10, "1/MP", "streaks per megapixel"},
    FieldSpec{"length_px", K::kRange, 0, 400, false, 1, "px", "streak length range"},
    FieldSpec{"angle", K::kReal, -0.8, 0.8, false, 0.01, "rad", "mean angle from vertical"},
    FieldSpec{"angle_jitter", K::kReal, 0, 0.5, false, 0.01, "rad", "per-streak angle spread"},
    FieldSpec{"alpha", K::kReal, 0, 1, false, 0.01, "", "streak opacity"},
    FieldSpec{"streak_color", K::kRgb, 0, 255, false, 1, "", "streak color"},
    kOvercastAmount,
};

constexpr std::array kReflectionFields = {
    FieldSpec{"reflectivity", K::kReal, 0, 1, false, 0.01, "", "mirror blend weight on road"},
    FieldSpec{"roughness_blur", K::kReal, 0, 20, false, 0.1, "px", "blur of the reflected image"},
    FieldSpec{"droplet_count", K::kCount, 0, 500, false, 1, "", "lens droplets"},
    FieldSpec{"droplet_radius_px", K::kRange, 0, 400, false, 1, "px", "droplet radius range"},
    FieldSpec{"droplet_alpha", K::kReal, 0, 1, false, 0.01, "", "droplet opacity"},
    kOvercastAmount,
};

constexpr std::array kPuddleFields = {
    FieldSpec{"noise_frequency", K::kReal, 0, 0.5, true, 0.001, "1/px", "Perlin base frequency"},
    FieldSpec{"threshold", K::kReal, -1, 1, false, 0.01, "", "noise level above which road is wet"},
    FieldSpec{"reflectivity", K::kReal, 0, 1, false, 0.01, "", "mirror blend weight in puddles"},
    kOvercastAmount,
};

constexpr std::array kCompositionFields = {
    kOvercastAmount,
    FieldSpec{"reflectivity", K::kReal, 0, 1, false, 0.01, "", "wet street mirror weight"},
    FieldSpec{"roughness_blur", K::kReal, 0, 20, false, 0.1, "px", "blur of the reflected image"},
    FieldSpec{"fog_beta", K::kReal, 0, 1, false, 0.0005, "1/m", "light fog extinction, 0 = off"},
    FieldSpec{"fog_blur_sigma_max", K::kReal, 0, 20, false, 0.1, "px", "light fog blur"},
    FieldSpec{"airlight", K::kRgb, 0, 255, false, 1, "", "fog light color"},
    FieldSpec{"streak_count", K::kReal, 0, 20000, false, 10, "1/MP", "streaks per megapixel"},
    FieldSpec{"streak_length_px", K::kRange, 0, 400, false, 1, "px", "streak length range"},
    FieldSpec{"streak_angle", K::kReal, -0.8, 0.8, false, 0.01, "rad", "mean angle from vertical"},
    FieldSpec{"streak_angle_jitter", K::kReal, 0, 0.5, false, 0.01, "rad", "angle spread"},
    FieldSpec{"streak_alpha", K::kReal, 0, 1, false, 0.01, "", "streak opacity"},
    FieldSpec{"streak_color", K::kRgb, 0, 255, false, 1, "", "streak color"},
    FieldSpec{"droplet_count", K::kCount, 0, 500, false, 1, "", "lens droplets"},
    FieldSpec{"droplet_radius_px", K::kRange, 0, 400, false, 1, "px", "droplet radius range"},
    FieldSpec{"droplet_alpha", K::kReal, 0, 1, false, 0.01, "", "droplet opacity"},
};

constexpr std::array<Family, 7> kFamilies = {
    Family::kOvercast,    Family::kDenseFog,           Family::kShadowSunglare,
    Family::kRainStreaks, Family::kWetStreetLensDroplets, Family::kPuddles,
    Family::kRainComposition,
};

const FieldSpec* find_spec(Family f, std::string_view name) {
  for (const auto& s : field_specs(f)) {
    if (s.name == name) {
      return &s;
    }
  }
  return nullptr;
}

std::string_view kind_name(FieldKind k) {
  switch (k) {
    case K::kReal: return "number";
    case K::kCount: return "integer";
    case K::kRgb: return "[r, g, b]";
    case K::kRange: return "[lo, hi]";
  }
  return "?";
}

void check_scalar(const FieldSpec& s, double v, const std::string& field) {
  if (!std::isfinite(v)) {
    throw ParamError(field, "must be finite");
  }
  const bool low = s.min_exclusive ? v <= s.min : v < s.min;
  if (low || v > s.max) {
    throw ParamError(field, fmt::format("{} outside {}{}, {}]", v, s.min_exclusive ? "(" : "[",
                                        s.min, s.max));
  }
}

void check_value(const FieldSpec& s, const ParamValue& v) {
  const std::string field(s.name);
  switch (s.kind) {
    case K::kReal:
    case K::kCount: {
      const double* d = std::get_if<double>(&v);
      if (d == nullptr) {
        throw ParamError(field, fmt::format("expected {}", kind_name(s.kind)));
      }
      check_scalar(s, *d, field);
      if (s.kind == K::kCount && std::floor(*d) != *d) {
        throw ParamError(field, fmt::format("{} is not an integer", *d));
      }
      break;
    }
    case K::kRgb: {
      const Rgb* c = std::get_if<Rgb>(&v);
      if (c == nullptr) {
        throw ParamError(field, "expected [r, g, b]");
      }
      for (double x : *c) {
        check_scalar(s, x, field);
      }
      break;
    }
    case K::kRange: {
      const Range* r = std::get_if<Range>(&v);
      if (r == nullptr) {
        throw ParamError(field, "expected [lo, hi]");
      }
      check_scalar(s, r->lo, field);
      check_scalar(s, r->hi, field);
      if (r->lo > r->hi) {
        throw ParamError(field, fmt::format("lo {} > hi {}", r->lo, r->hi));
      }
      break;
    }
  }
}

ParamValue value_from_numbers(const FieldSpec& s, std::span<const double> nums, bool is_array) {
  const std::string field(s.name);
  switch (s.kind) {
    case K::kReal:
    case K::kCount:
      if (is_array || nums.size() != 1) {
        throw ParamError(field, fmt::format("expected {}", kind_name(s.kind)));
      }
      return nums[0];
    case K::kRgb:
      if (!is_array || nums.size() != 3) {
        throw ParamError(field, "expected [r, g, b]");
      }
      return Rgb{nums[0], nums[1], nums[2]};
    case K::kRange:
      if (!is_array || nums.size() != 2) {
        throw ParamError(field, "expected [lo, hi]");
      }
      return Range{nums[0], nums[1]};
  }
  throw ParamError(field, "unsupported kind");
}

double get_real(const ParamSet& p, std::string_view name) {
  const auto it = p.find(name);
  if (it == p.end() || !std::holds_alternative<double>(it->second)) {
    throw ParamError(std::string(name), "missing");
  }
  return std::get<double>(it->second);
}

Rgb get_rgb(const ParamSet& p, std::string_view name) {
  const auto it = p.find(name);
  if (it == p.end() || !std::holds_alternative<Rgb>(it->second)) {
    throw ParamError(std::string(name), "missing");
  }
  return std::get<Rgb>(it->second);
}

Range get_range(const ParamSet& p, std::string_view name) {
  const auto it = p.find(name);
  if (it == p.end() || !std::holds_alternative<Range>(it->second)) {
    throw ParamError(std::string(name), "missing");
  }
  return std::get<Range>(it->second);
}

Family family_of_section(std::string_view section, int line, std::string_view source) {
  try {
    return parse_family(section);
  } catch (const Error&) {
    throw Error(errc::kParse, fmt::format("{}:{}: unknown family section [{}]", source, line,
                                          section));
  }
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view family_name(Family f) noexcept {
  switch (f) {
    case Family::kOvercast: return "overcast";
    case Family::kDenseFog: return "dense_fog";
    case Family::kShadowSunglare: return "shadow_sunglare";
    case Family::kRainStreaks: return "rain_streaks";
    case Family::kWetStreetLensDroplets: return "wet_street_lens_droplets";
    case Family::kPuddles: return "puddles";
    case Family::kRainComposition: return "rain_composition";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  for (Family f : kFamilies) {
    if (family_name(f) == name) {
      return f;
    }
  }
  throw Error(errc::kUnknownFamily, fmt::format("unknown augmentation family '{}'", name));
}

std::span<const Family> all_families() noexcept { return kFamilies; }

std::span<const FieldSpec> field_specs(Family f) noexcept {
  switch (f) {
    case Family::kOvercast: return kOvercastFields;
    case Family::kDenseFog: return kFogFields;
    case Family::kShadowSunglare: return kSunFields;
    case Family::kRainStreaks: return kStreakFields;
    case Family::kWetStreetLensDroplets: return kReflectionFields;
    case Family::kPuddles: return kPuddleFields;
    case Family::kRainComposition: return kCompositionFields;
  }
  return {};
}

ParamError::ParamError(std::string field, std::string reason)
    : Error(errc::kInvalidParams, fmt::format("{}: {}", field, reason)),
      field_(std::move(field)),
      reason_(std::move(reason)) {}

void validate_params(Family f, const ParamSet& params) {
  for (const auto& [name, value] : params) {
    if (find_spec(f, name) == nullptr) {
      throw ParamError(name, fmt::format("not a field of {}", family_name(f)));
    }
  }
  for (const auto& s : field_specs(f)) {
    const auto it = params.find(s.name);
    if (it == params.end()) {
      throw ParamError(std::string(s.name), "missing");
    }
    check_value(s, it->second);
  }
}

ParamSet merge_params(Family f, const ParamSet& base, const ParamSet& overrides) {
  ParamSet out = base;
  for (const auto& [name, value] : overrides) {
    out.insert_or_assign(name, value);
  }
  validate_params(f, out);
  return out;
}

nlohmann::json params_to_json(const ParamSet& params) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, value] : params) {
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double>) {
            j[name] = v;
          } else if constexpr (std::is_same_v<T, Rgb>) {
            j[name] = {v[0], v[1], v[2]};
          } else {
            j[name] = {v.lo, v.hi};
          }
        },
        value);
  }
  return j;
}

ParamSet params_from_json(Family f, const nlohmann::json& j) {
  if (!j.is_object()) {
    throw ParamError("params", "expected a JSON object");
  }
  ParamSet out;
  for (const auto& [name, value] : j.items()) {
    const FieldSpec* s = find_spec(f, name);
    if (s == nullptr) {
      throw ParamError(name, fmt::format("not a field of {}", family_name(f)));
    }
    std::vector<double> nums;
    const bool is_array = value.is_array();
    if (is_array) {
      for (const auto& x : value) {
        if (!x.is_number()) {
          throw ParamError(name, "array elements must be numbers");
        }
        nums.push_back(x.get<double>());
      }
    } else if (value.is_number()) {
      nums.push_back(value.get<double>());
    } else {
      throw ParamError(name, fmt::format("expected {}", kind_name(s->kind)));
    }
    ParamValue v = value_from_numbers(*s, nums, is_array);
    check_value(*s, v);
    out.emplace(name, v);
  }
  return out;
}

ParamSet params_from_toml(Family f, const toml::Table& table) {
  ParamSet out;
  for (const auto& e : table.entries) {
    if (e.key == "family" || e.key == "note" || e.key == "created_at") {
      continue;
    }
    const FieldSpec* s = find_spec(f, e.key);
    if (s == nullptr) {
      throw ParamError(e.key, fmt::format("not a field of {} (line {})", family_name(f), e.line));
    }
    if (const auto* d = std::get_if<double>(&e.value)) {
      out.emplace(e.key, value_from_numbers(*s, std::span<const double>(d, 1), false));
    } else if (const auto* arr = std::get_if<std::vector<double>>(&e.value)) {
      out.emplace(e.key, value_from_numbers(*s, *arr, true));
    } else {
      throw ParamError(e.key, fmt::format("expected {} (line {})", kind_name(s->kind), e.line));
    }
  }
  return out;
}

std::vector<toml::Entry> params_to_toml(Family f, const ParamSet& params) {
  std::vector<toml::Entry> out;
  for (const auto& s : field_specs(f)) {
    const auto it = params.find(s.name);
    if (it == params.end()) {
      continue;
    }
    toml::Value v = std::visit(
        [](const auto& x) -> toml::Value {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, double>) {
            return x;
          } else if constexpr (std::is_same_v<T, Rgb>) {
            return std::vector<double>{x[0], x[1], x[2]};
          } else {
            return std::vector<double>{x.lo, x.hi};
          }
        },
        it->second);
    out.push_back(toml::Entry{std::string(s.name), std::move(v), 0});
  }
  return out;
}

// ---------------------------------------------------------------------------

OvercastParams OvercastParams::from(const ParamSet& p) {
  return {get_real(p, "amount"), get_rgb(p, "sky_gray"), get_real(p, "sky_weight")};
}

FogParams FogParams::from(const ParamSet& p) {
  return {get_real(p, "beta"), get_rgb(p, "airlight"), get_real(p, "blur_sigma_max"),
          get_real(p, "overcast_amount")};
}

SunParams SunParams::from(const ParamSet& p) {
  return {get_real(p, "elevation"), get_real(p, "glare_sigma"), get_real(p, "glare_gain"),
          get_real(p, "saturation_boost"), get_real(p, "shadow_strength")};
}

RainStreakParams RainStreakParams::from(const ParamSet& p) {
  return {get_real(p, "count"),        get_range(p, "length_px"), get_real(p, "angle"),
          get_real(p, "angle_jitter"), get_real(p, "alpha"),      get_rgb(p, "streak_color")};
}

ReflectionParams ReflectionParams::from(const ParamSet& p) {
  return {get_real(p, "reflectivity"), get_real(p, "roughness_blur"),
          static_cast<int>(get_real(p, "droplet_count")), get_range(p, "droplet_radius_px"),
          get_real(p, "droplet_alpha")};
}

PuddleParams PuddleParams::from(const ParamSet& p) {
  return {get_real(p, "noise_frequency"), get_real(p, "threshold"), get_real(p, "reflectivity")};
}

RainCompositionParams RainCompositionParams::from(const ParamSet& p) {
  RainCompositionParams out;
  out.overcast_amount = get_real(p, "overcast_amount");
  out.reflection.reflectivity = get_real(p, "reflectivity");
  out.reflection.roughness_blur = get_real(p, "roughness_blur");
  out.reflection.droplet_count = static_cast<int>(get_real(p, "droplet_count"));
  out.reflection.droplet_radius_px = get_range(p, "droplet_radius_px");
  out.reflection.droplet_alpha = get_real(p, "droplet_alpha");
  out.fog.beta = get_real(p, "fog_beta");
  out.fog.airlight = get_rgb(p, "airlight");
  out.fog.blur_sigma_max = get_real(p, "fog_blur_sigma_max");
  out.fog.overcast_amount = 0.0;
  out.streaks.count = get_real(p, "streak_count");
  out.streaks.length_px = get_range(p, "streak_length_px");
  out.streaks.angle = get_real(p, "streak_angle");
  out.streaks.angle_jitter = get_real(p, "streak_angle_jitter");
  out.streaks.alpha = get_real(p, "streak_alpha");
  out.streaks.streak_color = get_rgb(p, "streak_color");
  return out;
}

double overcast_amount_of(const ParamSet& p) {
  const auto it = p.find("overcast_amount");
  if (it == p.end()) {
    return 0.0;
  }
  return std::get<double>(it->second);
}

// ---------------------------------------------------------------------------

const IntensityTables& IntensityTables::builtin() {
  static const IntensityTables tables = parse(kBuiltinTablesToml, "<builtin intensity tables>");
  return tables;
}

IntensityTables IntensityTables::parse(std::string_view text, std::string_view source) {
  const toml::Document doc = toml::parse(text, source);
  IntensityTables out;
  out.version_ = doc.root.string("version").value_or("");
  if (out.version_.empty()) {
    throw Error(errc::kParse, fmt::format("{}: missing top-level version", source));
  }
  std::map<Family, std::array<bool, kMaxLevel>> seen;
  for (const auto& t : doc.tables) {
    const auto dot = t.name.find('.');
    if (dot == std::string::npos) {
      throw Error(errc::kParse,
                  fmt::format("{}:{}: expected [family.level] or [custom.name]", source, t.line));
    }
    const std::string head = t.name.substr(0, dot);
    const std::string tail = t.name.substr(dot + 1);
    try {
      if (head == "custom") {
        const auto fam = t.string("family");
        if (!fam) {
          throw Error(errc::kParse,
                      fmt::format("{}:{}: preset [{}] has no family", source, t.line, t.name));
        }
        Preset p{tail, family_of_section(*fam, t.line, source), {}, t.string("note").value_or(""),
                 t.string("created_at").value_or("")};
        p.params = params_from_toml(p.family, t);
        out.add_preset(std::move(p));
        continue;
      }
      const Family f = family_of_section(head, t.line, source);
      int level = 0;
      if (tail.size() != 1 || tail[0] < '1' || tail[0] > '5') {
        throw Error(errc::kParse, fmt::format("{}:{}: level must be 1..5 in [{}]", source, t.line,
                                              t.name));
      }
      level = tail[0] - '0';
      ParamSet params = params_from_toml(f, t);
      validate_params(f, params);
      out.rows_[f][static_cast<std::size_t>(level - 1)] = std::move(params);
      seen[f][static_cast<std::size_t>(level - 1)] = true;
    } catch (const ParamError& e) {
      throw Error(errc::kParse, fmt::format("{}:{}: [{}] {}", source, t.line, t.name, e.what()));
    }
  }
  for (Family f : kFamilies) {
    for (int level = kMinLevel; level <= kMaxLevel; ++level) {
      if (!seen[f][static_cast<std::size_t>(level - 1)]) {
        throw Error(errc::kParse, fmt::format("{}: missing table [{}.{}]", source,
                                              family_name(f), level));
      }
    }
  }
  for (int level = 1; level <= 3; ++level) {
    const auto& row = out.rows_[Family::kWetStreetLensDroplets][static_cast<std::size_t>(level - 1)];
    if (get_real(row, "droplet_count") != 0.0) {
      throw Error(errc::kParse,
                  fmt::format("{}: wet_street_lens_droplets.{} must have droplet_count = 0",
                              source, level));
    }
  }
  return out;
}

IntensityTables IntensityTables::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(errc::kIo, fmt::format("cannot open intensity tables {}", path.string()));
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

const ParamSet& IntensityTables::row(Family f, int level) const {
  if (level < kMinLevel || level > kMaxLevel) {
    throw Error(errc::kLevelOutOfRange,
                fmt::format("level {} outside {}..{}", level, kMinLevel, kMaxLevel));
  }
  return rows_.at(f)[static_cast<std::size_t>(level - 1)];
}

const Preset& IntensityTables::preset(std::string_view name) const {
  if (name.starts_with("custom/")) {
    name.remove_prefix(7);
  }
  for (const auto& p : presets_) {
    if (p.name == name) {
      return p;
    }
  }
  throw Error(errc::kUnknownPreset, fmt::format("no preset named '{}'", name));
}

bool IntensityTables::has_preset(std::string_view name) const noexcept {
  if (name.starts_with("custom/")) {
    name.remove_prefix(7);
  }
  return std::any_of(presets_.begin(), presets_.end(),
                     [&](const Preset& p) { return p.name == name; });
}

void IntensityTables::set_row(Family f, int level, ParamSet params) {
  if (level < kMinLevel || level > kMaxLevel) {
    throw Error(errc::kLevelOutOfRange,
                fmt::format("level {} outside {}..{}", level, kMinLevel, kMaxLevel));
  }
  validate_params(f, params);
  rows_[f][static_cast<std::size_t>(level - 1)] = std::move(params);
}

void IntensityTables::add_preset(Preset p) {
  if (!is_valid_preset_name(p.name)) {
    throw Error(errc::kInvalidArgument, fmt::format("invalid preset name '{}'", p.name));
  }
  if (has_preset(p.name)) {
    throw Error(errc::kInvalidArgument, fmt::format("duplicate preset '{}'", p.name));
  }
  validate_params(p.family, p.params);
  presets_.push_back(std::move(p));
}

std::string IntensityTables::to_toml() const {
  std::string out = fmt::format("version = {}\n", toml::format_value(version_));
  for (Family f : kFamilies) {
    const auto it = rows_.find(f);
    if (it == rows_.end()) {
      continue;
    }
    for (int level = kMinLevel; level <= kMaxLevel; ++level) {
      toml::Table t{fmt::format("{}.{}", family_name(f), level),
                    params_to_toml(f, it->second[static_cast<std::size_t>(level - 1)]), 0};
      out += "\n" + toml::format_table(t);
    }
  }
  for (const auto& p : presets_) {
    out += "\n" + format_preset_section(p);
  }
  return out;
}

std::string format_preset_section(const Preset& p) {
  toml::Table t{"custom." + p.name, {}, 0};
  t.entries.push_back({"family", std::string(family_name(p.family)), 0});
  if (!p.note.empty()) {
    t.entries.push_back({"note", p.note, 0});
  }
  if (!p.created_at.empty()) {
    t.entries.push_back({"created_at", p.created_at, 0});
  }
  for (auto& e : params_to_toml(p.family, p.params)) {
    t.entries.push_back(std::move(e));
  }
  return toml::format_table(t);
}

bool is_valid_preset_name(std::string_view name) noexcept {
  if (name.empty() || name.size() > 64) {
    return false;
  }
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

ParamSet resolve_intensity(Family family, int level) {
  return IntensityTables::builtin().row(family, level);
}

ParamSet resolve_intensity(std::string_view family, int level) {
  return resolve_intensity(parse_family(family), level);
}

std::string AugSpec::subset_name() const {
  if (preset) {
    return fmt::format("{}_custom_{}", family_name(family), *preset);
  }
  return fmt::format("{}_{}", family_name(family), level);
}

AugSpec AugSpec::from_level(Family f, int level, std::uint64_t seed,
                            const IntensityTables& tables) {
  return AugSpec{f, level, std::nullopt, tables.row(f, level), seed};
}

AugSpec AugSpec::from_preset(std::string_view name, std::uint64_t seed,
                             const IntensityTables& tables) {
  const Preset& p = tables.preset(name);
  return AugSpec{p.family, 0, p.name, p.params, seed};
}

}  // namespace wxforge
