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

#include <cmath>
#include <numbers>
#include <vector>

#include "family_stats.hpp"
#include "support.hpp"
#include "wxforge/augment.hpp"
#include "wxforge/parallel.hpp"

using namespace wxforge;
using namespace wxforge::testing;

namespace {

template <class F>
std::string error_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return "";
}

AugSpec spec_with(Family f, ParamSet p, std::uint64_t seed = 7) {
  AugSpec s;
  s.family = f;
  s.level = 1;
  s.params = std::move(p);
  s.seed = seed;
  return s;
}

ImageRgb shared_overcast(const LoadedScene& s, double amount) {
  return overcast(s.image, s.seg, amount, kDefaultSkyGray, amount);
}

// Scene with a red band over a uniformly gray road, for mirror checks.
LoadedScene red_over_road() {
  LoadedScene s = make_scene();
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      const bool road = y >= 32;
      s.seg.class_ids[static_cast<std::size_t>(y) * 64 + x] = road ? kRoad : kBuilding;
      std::uint8_t* px = s.image.at(x, y);
      px[0] = road ? 90 : 220;
      px[1] = road ? 90 : 20;
      px[2] = road ? 90 : 30 + y;  // row-dependent so the mirror row is visible
    }
  }
  s.boxes.clear();
  return s;
}

}  // namespace

TEST_CASE("overcast examples") {
  const LoadedScene s = make_scene();
  CHECK(overcast(s.image, s.seg, 0.0, kDefaultSkyGray, 0.0) == s.image);

  LoadedScene no_sky = s;
  std::replace(no_sky.seg.class_ids.begin(), no_sky.seg.class_ids.end(), kSky, kBuilding);
  CHECK(overcast(no_sky.image, no_sky.seg, 0.4, kDefaultSkyGray, 0.8) ==
        desaturate(no_sky.image, 0.4));

  LoadedScene one = make_scene(1, 1);
  one.seg.class_ids[0] = kSky;
  one.image = ImageRgb(1, 1, {135, 206, 235});
  CHECK(overcast(one.image, one.seg, 0.0, {128, 128, 128}, 1.0) == ImageRgb(1, 1, {128, 128, 128}));

  LoadedScene roleless = s;
  roleless.seg.roles.sky.clear();
  CHECK(error_kind([&] { overcast(roleless.image, roleless.seg, 0.3, kDefaultSkyGray, 0.3); }) ==
        errc::kMissingSkyRole);
}

TEST_CASE("fog closed form") {
  LoadedScene s = make_scene(8, 8);
  std::fill(s.image.pixels().begin(), s.image.pixels().end(), 100);
  std::fill(s.depth->depth.begin(), s.depth->depth.end(), 1.0f);
  s.depth->depth[0] = 0.0f;  // pixel (0,0) sits at the camera
  FogParams p;
  p.beta = std::numbers::ln2 / s.depth->max_range_m;  // t = 0.5 at depth 1
  p.airlight = {200, 200, 200};
  p.blur_sigma_max = 0.0;
  p.overcast_amount = 0.0;
  const ImageRgb out = dense_fog(s.image, *s.depth, s.seg, p);
  CHECK(out.at(0, 0)[0] == 100);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      if (x == 0 && y == 0) continue;
      for (int c = 0; c < 3; ++c) CHECK(out.at(x, y)[c] == 150);
    }
  }
}

TEST_CASE("fog: zero depth is untouched even with blur") {
  LoadedScene s = make_scene();
  std::fill(s.depth->depth.begin(), s.depth->depth.end(), 0.0f);
  const FogParams p = FogParams::from(merge_params(Family::kDenseFog, resolve_intensity(Family::kDenseFog, 5),
                                                   {{"overcast_amount", 0.0}}));
  CHECK(dense_fog(s.image, *s.depth, s.seg, p) == s.image);
}

TEST_CASE("fog: doubling beta never moves pixels away from the airlight") {
  const LoadedScene s = make_scene();
  FogParams p = FogParams::from(resolve_intensity(Family::kDenseFog, 2));
  const auto distance = [&](const FogParams& q) {
    const ImageRgb out = dense_fog(s.image, *s.depth, s.seg, q);
    double sum = 0.0;
    for (std::size_t i = 0; i < out.pixels().size(); ++i) {
      sum += std::abs(out.pixels()[i] - q.airlight[i % 3]);
    }
    return sum;
  };
  double prev = distance(p);
  for (int k = 0; k < 5; ++k) {
    p.beta *= 2.0;
    const double cur = distance(p);
    CHECK(cur <= prev);
    prev = cur;
  }
  LoadedScene bad = s;
  bad.depth->width = 32;
  CHECK(error_kind([&] { dense_fog(bad.image, *bad.depth, bad.seg, p); }) ==
        errc::kDimensionMismatch);
}

TEST_CASE("rain streak count follows the density") {
  const LoadedScene s = make_scene(1280, 720);
  RainStreakParams p = RainStreakParams::from(resolve_intensity(Family::kRainStreaks, 1));
  p.count = 100.0;
  AugmentStats stats;
  rain_streaks(s.image, s.seg, p, 0.0, RandomStream(1, "x/rain_streaks"), &stats);
  CHECK(stats.streaks_drawn == 92);

  const LoadedScene small = make_scene();
  p.count = 0.0;
  CHECK(rain_streaks(small.image, small.seg, p, 0.35, RandomStream(1, "x"), nullptr) ==
        shared_overcast(small, 0.35));
}

TEST_CASE("streaks differ across seeds and repeat for one seed") {
  const LoadedScene s = make_scene();
  const AugSpec a = AugSpec::from_level(Family::kRainStreaks, 5, 1);
  const AugSpec b = AugSpec::from_level(Family::kRainStreaks, 5, 2);
  const ImageRgb first = augment(a, s.view(), s.image_id);
  CHECK(augment(a, s.view(), s.image_id) == first);
  CHECK_FALSE(augment(b, s.view(), s.image_id) == first);
  // The image id is part of the stream label.
  CHECK_FALSE(augment(a, s.view(), "other") == first);
}

TEST_CASE("wet street mirror oracle") {
  const LoadedScene s = red_over_road();
  ReflectionParams p;
  p.reflectivity = 1.0;
  p.roughness_blur = 0.0;
  p.droplet_count = 0;
  AugmentStats stats;
  const ImageRgb out = wet_street_lens_droplets(s.image, *s.depth, s.seg, p, 0.0,
                                                RandomStream(3, "w"), &stats);
  for (int y = 32; y < 64; ++y) {
    const int sy = 2 * 32 - 1 - y;
    for (int x = 0; x < 64; ++x) {
      for (int c = 0; c < 3; ++c) REQUIRE(out.at(x, y)[c] == s.image.at(x, sy)[c]);
    }
  }
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 64; ++x) {
      for (int c = 0; c < 3; ++c) REQUIRE(out.at(x, y)[c] == s.image.at(x, y)[c]);
    }
  }
  CHECK(stats.reflected_pixels == 32 * 64);

  p.reflectivity = 0.0;
  CHECK(wet_street_lens_droplets(s.image, *s.depth, s.seg, p, 0.3, RandomStream(3, "w")) ==
        shared_overcast(s, 0.3));

  LoadedScene roleless = s;
  roleless.seg.roles.road.clear();
  CHECK(error_kind([&] {
          wet_street_lens_droplets(roleless.image, *roleless.depth, roleless.seg, p, 0.0,
                                   RandomStream(3, "w"));
        }) == errc::kMissingRoadRole);
}

TEST_CASE("reflections fall back to the depth horizon when road reaches the top") {
  LoadedScene s = red_over_road();
  // Column 5 is road from the first row; the fallback horizon is the row
  // of largest mean depth, row 0 for a depth ramp that falls with y.
  for (int y = 0; y < 64; ++y) s.seg.class_ids[static_cast<std::size_t>(y) * 64 + 5] = kRoad;
  ReflectionParams p;
  p.reflectivity = 1.0;
  const ImageRgb out = wet_street_lens_droplets(s.image, *s.depth, s.seg, p, 0.0,
                                                RandomStream(3, "w"));
  // Row 0 boundary leaves nothing above to mirror, so the column is kept.
  for (int y = 0; y < 64; ++y) CHECK(out.at(5, y)[2] == s.image.at(5, y)[2]);
}

TEST_CASE("road-masked effects are local to road pixels") {
  const LoadedScene s = make_scene();
  for (int level = 1; level <= 5; ++level) {
    CAPTURE(level);
    ParamSet wet = resolve_intensity(Family::kWetStreetLensDroplets, level);
    wet["droplet_count"] = 0.0;  // droplets sit on the lens, not the road
    const double amount = std::get<double>(wet.at("overcast_amount"));
    const ImageRgb base = shared_overcast(s, amount);
    const ImageRgb w = augment(spec_with(Family::kWetStreetLensDroplets, wet), s.view(), "a");
    const ImageRgb pud =
        augment(AugSpec::from_level(Family::kPuddles, level, 7), s.view(), "a");
    const double pud_amount =
        std::get<double>(resolve_intensity(Family::kPuddles, level).at("overcast_amount"));
    const ImageRgb pud_base = shared_overcast(s, pud_amount);
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        if (s.seg.is_road(x, y)) continue;
        for (int c = 0; c < 3; ++c) {
          REQUIRE(w.at(x, y)[c] == base.at(x, y)[c]);
          REQUIRE(pud.at(x, y)[c] == pud_base.at(x, y)[c]);
        }
      }
    }
  }
}

TEST_CASE("puddle masks") {
  const LoadedScene s = make_scene();
  const RandomStream stream(11, "scene/puddles");
  PuddleParams p;
  p.noise_frequency = 0.05;
  std::size_t road = 0;
  for (auto id : s.seg.class_ids) road += id == kRoad;

  p.threshold = -1.0;
  const BinaryMask all = puddle_mask(*s.depth, s.seg, p, stream);
  CHECK(all.count() == road);
  p.threshold = 1.0;
  CHECK(puddle_mask(*s.depth, s.seg, p, stream).count() == 0);
  CHECK(puddles(s.image, *s.depth, s.seg, p, 0.25, stream) == shared_overcast(s, 0.25));

  std::size_t prev = road + 1;
  for (double t = -0.6; t <= 0.61; t += 0.2) {
    p.threshold = t;
    const std::size_t n = puddle_mask(*s.depth, s.seg, p, stream).count();
    CHECK(n <= prev);
    prev = n;
  }
  p.threshold = 0.2;
  const BinaryMask lo = puddle_mask(*s.depth, s.seg, p, stream);
  p.threshold = 0.4;
  const BinaryMask hi = puddle_mask(*s.depth, s.seg, p, stream);
  CHECK(hi.count() <= lo.count());
  for (std::size_t i = 0; i < hi.bits.size(); ++i) {
    if (hi.bits[i]) CHECK(lo.bits[i]);
  }
}

TEST_CASE("sun placement and shadow geometry") {
  const LoadedScene s = make_scene();
  RandomStream st(5, "scene/shadow_sunglare/sun");
  const SunPose sun = place_sun(s.seg, 0.7, st);
  CHECK(s.seg.is_sky(static_cast<int>(sun.image_xy.x), static_cast<int>(sun.image_xy.y)));
  CHECK(sun.elevation == 0.7);

  const BBox& box = s.boxes[0];
  const BinaryMask inst = instance_mask(s.seg, box);
  CHECK(inst.count() == 200);  // the 10x20 car

  SunPose side;
  side.elevation = std::numbers::pi / 4;
  side.azimuth = 0.5;  // sun to the right
  const int horizon = estimate_horizon_row(s.seg);
  const BinaryMask shadow = shadow_mask(s.seg, *s.depth, box, side, horizon);
  const double ratio = static_cast<double>(shadow.count()) / static_cast<double>(inst.count());
  CHECK(ratio >= 0.5);
  CHECK(ratio <= 1.5);
  const auto centroid_x = [](const BinaryMask& m) {
    double sx = 0.0;
    for (int y = 0; y < m.height; ++y) {
      for (int x = 0; x < m.width; ++x) sx += m.at(x, y) ? x : 0;
    }
    return sx / static_cast<double>(m.count());
  };
  CHECK(centroid_x(shadow) < centroid_x(inst));
  side.azimuth = -0.5;
  CHECK(centroid_x(shadow_mask(s.seg, *s.depth, box, side, horizon)) > centroid_x(inst));
}

TEST_CASE("shadow_sunglare identity and shadow-only cases") {
  const LoadedScene s = make_scene();
  SunParams p;
  p.glare_gain = 0.0;
  p.saturation_boost = 0.0;
  p.shadow_strength = 0.9;
  CHECK(shadow_sunglare(s.image, *s.depth, s.seg, {}, p, RandomStream(1, "s")) == s.image);

  // Shadows darken road pixels only; side shading stays on the object.
  AugmentStats stats;
  const ImageRgb shaded =
      shadow_sunglare(s.image, *s.depth, s.seg, s.boxes, p, RandomStream(1, "s"), &stats);
  CHECK(stats.shadows_cast == 1);
  const BinaryMask inst = instance_mask(s.seg, s.boxes[0]);
  std::size_t darkened_road = 0;
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      const std::uint8_t* a = s.image.at(x, y);
      const std::uint8_t* b = shaded.at(x, y);
      const bool changed = a[0] != b[0] || a[1] != b[1] || a[2] != b[2];
      if (!changed) continue;
      CHECK((s.seg.is_road(x, y) || inst.at(x, y)));
      for (int c = 0; c < 3; ++c) CHECK(b[c] <= a[c]);
      darkened_road += s.seg.is_road(x, y);
    }
  }
  CHECK(darkened_road > 0);

  // With shadow_strength 0 the output depends on glare and saturation only.
  SunParams g = SunParams::from(resolve_intensity(Family::kShadowSunglare, 3));
  g.shadow_strength = 0.0;
  CHECK(shadow_sunglare(s.image, *s.depth, s.seg, s.boxes, g, RandomStream(1, "s")) ==
        shadow_sunglare(s.image, *s.depth, s.seg, {}, g, RandomStream(1, "s")));
}

TEST_CASE("boxes without instance pixels are skipped") {
  const LoadedScene s = make_scene();
  const std::vector<BBox> sky_box = {{2, 2, 12, 10, "kite"}};
  SunParams p = SunParams::from(resolve_intensity(Family::kShadowSunglare, 3));
  AugmentStats stats;
  CHECK_NOTHROW(
      shadow_sunglare(s.image, *s.depth, s.seg, sky_box, p, RandomStream(1, "s"), &stats));
  CHECK(stats.shadows_skipped == 1);
  CHECK(stats.shadows_cast == 0);
}

TEST_CASE("rain_composition identity and level ordering") {
  const LoadedScene s = make_scene();
  const auto p = RainCompositionParams::from(identity_params(Family::kRainComposition));
  CHECK(rain_composition(s.image, *s.depth, s.seg, s.boxes, p, RandomStream(1, "r")) == s.image);
  const ImageRgb l5 = rain_composition(s.image, *s.depth, s.seg, s.boxes, 5, RandomStream(1, "r"));
  const ImageRgb l1 = rain_composition(s.image, *s.depth, s.seg, s.boxes, 1, RandomStream(1, "r"));
  CHECK(l5 == rain_composition(s.image, *s.depth, s.seg, s.boxes, 5, RandomStream(1, "r")));
  CHECK(mean_abs_diff(l5, s.image) > mean_abs_diff(l1, s.image));
}

TEST_CASE("every family: identity, determinism, label preservation") {
  LoadedScene s = make_scene();
  LoadedScene flat = s;  // zero depth for the fog identity
  std::fill(flat.depth->depth.begin(), flat.depth->depth.end(), 0.0f);
  for (Family f : all_families()) {
    CAPTURE(family_name(f));
    const LoadedScene& scene = f == Family::kDenseFog ? flat : s;
    const ImageRgb id = augment(spec_with(f, identity_params(f)), scene.view(), "a");
    CHECK(id == scene.image);

    const SegMap seg_before = s.seg;
    const auto boxes_before = s.boxes;
    const auto depth_before = s.depth->depth;
    for (int level = kMinLevel; level <= kMaxLevel; ++level) {
      const AugSpec spec = AugSpec::from_level(f, level, 99);
      const ImageRgb a = augment(spec, s.view(), s.image_id);
      const ImageRgb b = augment(spec, s.view(), s.image_id);
      CHECK(a == b);
      CHECK(a.width() == s.image.width());
      CHECK(a.height() == s.image.height());
    }
    CHECK(s.seg.class_ids == seg_before.class_ids);
    CHECK(s.boxes == boxes_before);
    CHECK(s.depth->depth == depth_before);
  }
}

TEST_CASE("outputs do not depend on the worker count") {
  const LoadedScene s = make_scene();
  std::vector<AugSpec> jobs;
  for (Family f : all_families()) {
    for (int level = kMinLevel; level <= kMaxLevel; ++level) {
      jobs.push_back(AugSpec::from_level(f, level, 3));
    }
  }
  const auto run = [&](int workers) {
    std::vector<ImageRgb> out(jobs.size());
    parallel_for(jobs.size(), workers,
                 [&](std::size_t i) { out[i] = augment(jobs[i], s.view(), s.image_id); });
    return out;
  };
  CHECK(run(1) == run(8));
}

TEST_CASE("augment requires depth for depth families") {
  LoadedScene s = make_scene();
  s.depth.reset();
  for (Family f : all_families()) {
    const AugSpec spec = AugSpec::from_level(f, 2, 1);
    if (family_needs_depth(f)) {
      CHECK(error_kind([&] { augment(spec, s.view(), "a"); }) == errc::kMissingDepth);
    } else {
      CHECK_NOTHROW(augment(spec, s.view(), "a"));
    }
  }
  AugSpec bad = AugSpec::from_level(Family::kDenseFog, 2, 1);
  bad.params["beta"] = -1.0;
  const LoadedScene full = make_scene();
  CHECK(error_kind([&] { augment(bad, full.view(), "a"); }) == errc::kInvalidParams);
}

TEST_CASE("per-family intensity statistic is monotone over levels") {
  const LoadedScene s = make_scene();
  for (Family f : all_families()) {
    const FamilyStatistic st = measure_family(s, f);
    CAPTURE(st.name);
    CAPTURE(st.values[0]);
    CAPTURE(st.values[1]);
    CAPTURE(st.values[2]);
    CAPTURE(st.values[3]);
    CAPTURE(st.values[4]);
    CHECK(is_monotone(st));
  }
}
