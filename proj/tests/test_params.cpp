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

#include <doctest.h>

#include <string>

#include "support.hpp"
#include "wxforge/params.hpp"

using namespace wxforge;

namespace {

double real(const ParamSet& p, const char* name) { return std::get<double>(p.at(name)); }

template <class F>
std::string error_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return "";
}

}  // namespace

TEST_CASE("family names round trip") {
  CHECK(all_families().size() == 7);
  for (Family f : all_families()) CHECK(parse_family(family_name(f)) == f);
  CHECK(family_name(Family::kWetStreetLensDroplets) == "wet_street_lens_droplets");
  CHECK(error_kind([] { parse_family("snow"); }) == errc::kUnknownFamily);
}

TEST_CASE("resolve_intensity examples") {
  CHECK(real(resolve_intensity("dense_fog", 1), "beta") == 0.0065);
  CHECK(real(resolve_intensity("wet_street_lens_droplets", 2), "droplet_count") == 0.0);
  CHECK(error_kind([] { resolve_intensity("overcast", 6); }) == errc::kLevelOutOfRange);
  CHECK(error_kind([] { resolve_intensity("overcast", 0); }) == errc::kLevelOutOfRange);
  CHECK(error_kind([] { resolve_intensity("hail", 1); }) == errc::kUnknownFamily);
}

TEST_CASE("built-in tables are monotone in each family's dominant field") {
  const struct {
    Family family;
    const char* field;
    int direction;  // +1 rising with level, -1 falling
  } dominant[] = {
      {Family::kOvercast, "amount", +1},
      {Family::kDenseFog, "beta", +1},
      {Family::kShadowSunglare, "glare_gain", +1},
      {Family::kRainStreaks, "count", +1},
      {Family::kWetStreetLensDroplets, "reflectivity", +1},
      {Family::kPuddles, "threshold", -1},
      {Family::kRainComposition, "streak_count", +1},
  };
  for (const auto& d : dominant) {
    CAPTURE(family_name(d.family));
    for (int level = kMinLevel; level < kMaxLevel; ++level) {
      const double a = real(resolve_intensity(d.family, level), d.field);
      const double b = real(resolve_intensity(d.family, level + 1), d.field);
      CHECK(d.direction * (b - a) > 0);
    }
  }
  for (int level = 1; level <= 3; ++level) {
    CHECK(real(resolve_intensity(Family::kWetStreetLensDroplets, level), "droplet_count") == 0);
  }
  CHECK(real(resolve_intensity(Family::kWetStreetLensDroplets, 4), "droplet_count") > 0);
}

TEST_CASE("every built-in row validates") {
  for (Family f : all_families()) {
    for (int level = kMinLevel; level <= kMaxLevel; ++level) {
      CHECK_NOTHROW(validate_params(f, resolve_intensity(f, level)));
    }
  }
}

TEST_CASE("validation names the offending field") {
  ParamSet p = resolve_intensity(Family::kDenseFog, 3);
  p["beta"] = -1.0;
  try {
    validate_params(Family::kDenseFog, p);
    FAIL("expected ParamError");
  } catch (const ParamError& e) {
    CHECK(e.kind() == errc::kInvalidParams);
    CHECK(e.field() == "beta");
  }
  p["beta"] = 0.0;  // exclusive lower bound
  CHECK_THROWS_AS(validate_params(Family::kDenseFog, p), ParamError);

  ParamSet q = resolve_intensity(Family::kOvercast, 1);
  q.erase("sky_weight");
  try {
    validate_params(Family::kOvercast, q);
    FAIL("expected ParamError");
  } catch (const ParamError& e) {
    CHECK(e.field() == "sky_weight");
    CHECK(e.reason() == "missing");
  }
  q = resolve_intensity(Family::kOvercast, 1);
  q["bogus"] = 1.0;
  CHECK_THROWS_AS(validate_params(Family::kOvercast, q), ParamError);
  q = resolve_intensity(Family::kOvercast, 1);
  q["sky_gray"] = 3.0;  // wrong kind
  CHECK_THROWS_AS(validate_params(Family::kOvercast, q), ParamError);

  ParamSet w = resolve_intensity(Family::kWetStreetLensDroplets, 4);
  w["droplet_count"] = 2.5;
  CHECK_THROWS_AS(validate_params(Family::kWetStreetLensDroplets, w), ParamError);
  w = resolve_intensity(Family::kWetStreetLensDroplets, 4);
  w["droplet_radius_px"] = Range{9, 3};
  CHECK_THROWS_AS(validate_params(Family::kWetStreetLensDroplets, w), ParamError);
}

TEST_CASE("merge_params overlays then validates") {
  const ParamSet base = resolve_intensity(Family::kDenseFog, 1);
  const ParamSet merged = merge_params(Family::kDenseFog, base, {{"beta", 0.05}});
  CHECK(real(merged, "beta") == 0.05);
  CHECK(real(merged, "blur_sigma_max") == real(base, "blur_sigma_max"));
  CHECK_THROWS_AS(merge_params(Family::kDenseFog, base, {{"beta", 7.0}}), ParamError);
}

TEST_CASE("JSON parameters are typed by the schema") {
  const ParamSet p = resolve_intensity(Family::kRainStreaks, 2);
  const auto j = params_to_json(p);
  CHECK(j["length_px"] == nlohmann::json::array({8.0, 16.0}));
  CHECK(params_from_json(Family::kRainStreaks, j) == p);

  const ParamSet partial = params_from_json(Family::kRainStreaks, {{"alpha", 0.5}});
  CHECK(partial.size() == 1);
  try {
    params_from_json(Family::kRainStreaks, {{"alpha", "high"}});
    FAIL("expected ParamError");
  } catch (const ParamError& e) {
    CHECK(e.field() == "alpha");
  }
  CHECK_THROWS_AS(params_from_json(Family::kRainStreaks, {{"nope", 1}}), ParamError);
  CHECK_THROWS_AS(params_from_json(Family::kRainStreaks, {{"streak_color", {1, 2}}}), ParamError);
}

TEST_CASE("tables serialize and parse back to the same rows") {
  const IntensityTables& t = IntensityTables::builtin();
  CHECK_FALSE(t.version().empty());
  const IntensityTables back = IntensityTables::parse(t.to_toml());
  CHECK(back.version() == t.version());
  for (Family f : all_families()) {
    for (int level = kMinLevel; level <= kMaxLevel; ++level) {
      CHECK(back.row(f, level) == t.row(f, level));
    }
  }
  CHECK(back.to_toml() == t.to_toml());
}

TEST_CASE("table parse errors") {
  const std::string good = IntensityTables::builtin().to_toml();
  CHECK(error_kind([] { IntensityTables::parse("[overcast.1]\namount = 0.1\n"); }) == errc::kParse);
  CHECK(error_kind([&] { IntensityTables::parse(good + "\n[hail.1]\nx = 1\n"); }) == errc::kParse);
  CHECK(error_kind([&] { IntensityTables::parse(good + "\n[overcast.6]\namount = 0.1\n"); }) ==
        errc::kParse);
  // Droplets are reserved for the two strongest wet-street levels.
  std::string bad = good;
  const auto pos = bad.find("[wet_street_lens_droplets.2]");
  REQUIRE(pos != std::string::npos);
  const auto dc = bad.find("droplet_count = 0", pos);
  REQUIRE(dc != std::string::npos);
  bad.replace(dc, 17, "droplet_count = 3");
  CHECK(error_kind([&] { IntensityTables::parse(bad); }) == errc::kParse);
}

TEST_CASE("presets") {
  IntensityTables t = IntensityTables::builtin();
  ParamSet fog = resolve_intensity(Family::kDenseFog, 2);
  fog["beta"] = 0.02;
  t.add_preset({"fog_misty", Family::kDenseFog, fog, "morning haze", "2026-01-02T03:04:05Z"});
  CHECK(t.has_preset("fog_misty"));
  CHECK(t.preset("custom/fog_misty").params == fog);
  CHECK(error_kind([&] { t.add_preset({"fog_misty", Family::kDenseFog, fog, "", ""}); }) ==
        errc::kInvalidArgument);
  CHECK(error_kind([&] { t.add_preset({"Bad Name", Family::kDenseFog, fog, "", ""}); }) ==
        errc::kInvalidArgument);
  CHECK(error_kind([&] { t.preset("nothing"); }) == errc::kUnknownPreset);

  const IntensityTables back = IntensityTables::parse(t.to_toml());
  const Preset& p = back.preset("fog_misty");
  CHECK(p.family == Family::kDenseFog);
  CHECK(p.params == fog);
  CHECK(p.note == "morning haze");
  CHECK(p.created_at == "2026-01-02T03:04:05Z");

  // An appended section is all a tables file needs to gain a preset.
  const std::string appended =
      IntensityTables::builtin().to_toml() + "\n" + format_preset_section(p);
  CHECK(IntensityTables::parse(appended).preset("fog_misty").params == fog);

  const AugSpec s = AugSpec::from_preset("custom/fog_misty", 9, back);
  CHECK(s.subset_name() == "dense_fog_custom_fog_misty");
  CHECK(s.params == fog);
  CHECK(AugSpec::from_level(Family::kPuddles, 3, 1).subset_name() == "puddles_3");
}

TEST_CASE("preset names") {
  CHECK(is_valid_preset_name("fog_misty"));
  CHECK(is_valid_preset_name("a1"));
  CHECK_FALSE(is_valid_preset_name(""));
  CHECK_FALSE(is_valid_preset_name("Fog"));
  CHECK_FALSE(is_valid_preset_name("a-b"));
  CHECK_FALSE(is_valid_preset_name(std::string(65, 'a')));
}

TEST_CASE("set_row validates") {
  IntensityTables t = IntensityTables::builtin();
  ParamSet p = t.row(Family::kOvercast, 2);
  p["amount"] = 0.31;
  t.set_row(Family::kOvercast, 2, p);
  CHECK(real(t.row(Family::kOvercast, 2), "amount") == 0.31);
  p["amount"] = 3.0;
  CHECK_THROWS_AS(t.set_row(Family::kOvercast, 2, p), ParamError);
  CHECK(error_kind([&] { t.set_row(Family::kOvercast, 9, t.row(Family::kOvercast, 1)); }) ==
        errc::kLevelOutOfRange);
}

TEST_CASE("field specs cover every row field") {
  for (Family f : all_families()) {
    const ParamSet row = resolve_intensity(f, 1);
    CHECK(field_specs(f).size() == row.size());
    for (const auto& s : field_specs(f)) {
      CHECK(row.count(std::string(s.name)) == 1);
      CHECK(s.min <= s.max);
      CHECK(s.step > 0);
    }
  }
}
