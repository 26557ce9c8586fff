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
#include <random>
#include <set>

#include "wxforge/error.hpp"
#include "wxforge/procedural.hpp"
#include "wxforge/random.hpp"

using namespace wxforge;

namespace {

double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

DepthMap flat_depth(int w, int h, float d) {
  DepthMap m;
  m.width = w;
  m.height = h;
  m.depth.assign(static_cast<std::size_t>(w) * h, d);
  return m;
}

bool collinear(const Point2& a, const Point2& b, const Point2& c) {
  return std::abs((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)) < 1e-3;
}

bool general_position(const std::array<Point2, 4>& p) {
  return !collinear(p[0], p[1], p[2]) && !collinear(p[0], p[1], p[3]) &&
         !collinear(p[0], p[2], p[3]) && !collinear(p[1], p[2], p[3]);
}

}  // namespace

TEST_CASE("random streams are pure functions of seed and label") {
  RandomStream a(42, "img/fog");
  RandomStream b(42, "img/fog");
  RandomStream c(42, "img/rain");
  std::set<std::uint64_t> seen;
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
    differs |= va != c.next_u64();
    seen.insert(va);
  }
  CHECK(differs);
  CHECK(seen.size() == 100);
  // Forks are labelled streams, not continuations.
  CHECK(RandomStream(42, "img/fog").fork("sun").next_u64() ==
        RandomStream(42, "img/fog/sun").next_u64());
  RandomStream u(7, "u");
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    CHECK(u.below(10) < 10);
  }
}

TEST_CASE("splitmix64 reference values") {
  // First outputs of the reference SplitMix64 generator seeded with 0.
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
  CHECK(splitmix64(0x9E3779B97F4A7C15ULL) == 0x6E789E6AA1B965F4ULL);
  CHECK(fnv1a64("") == 0xCBF29CE484222325ULL);
  CHECK(fnv1a64("a") == 0xAF63DC4C8601EC8CULL);
}

TEST_CASE("perlin vanishes on lattice points") {
  const RandomStream s(1, "perlin");
  for (int x = -5; x <= 5; ++x) {
    for (int y = -5; y <= 5; ++y) {
      CHECK(perlin2d(x, y, 1.0, 1, s) == 0.0);
    }
  }
  // Lattice points at frequency f are multiples of 1/f.
  CHECK(perlin2d(40.0, 80.0, 0.025, 1, s) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("perlin range, spread and determinism over 10^4 probes") {
  const RandomStream s(9, "perlin");
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  double lo = 1.0;
  double hi = -1.0;
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng);
    const double y = u(rng);
    const double v = perlin2d(x, y, 1.0, 1, s);
    REQUIRE(v >= -1.0);
    REQUIRE(v <= 1.0);
    REQUIRE(v == perlin2d(x, y, 1.0, 1, s));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo < -0.2);
  CHECK(hi > 0.2);
}

TEST_CASE("perlin is Lipschitz on random probes") {
  const RandomStream s(3, "perlin");
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  constexpr double kEps = 1e-3;
  for (int i = 0; i < 2000; ++i) {
    const double x = u(rng);
    const double y = u(rng);
    const double base = perlin2d(x, y, 1.0, 3, s);
    // Gradient of one octave is bounded by a few units; three octaves at
    // most double that.
    CHECK(std::abs(perlin2d(x + kEps, y, 1.0, 3, s) - base) <= 10.0 * kEps);
    CHECK(std::abs(perlin2d(x, y + kEps, 1.0, 3, s) - base) <= 10.0 * kEps);
  }
}

TEST_CASE("perlin argument checks") {
  const RandomStream s(1, "p");
  CHECK_THROWS_AS(perlin2d(0.5, 0.5, 0.0, 1, s), Error);
  CHECK_THROWS_AS(perlin2d(0.5, 0.5, 1.0, 0, s), Error);
}

TEST_CASE("fit_homography examples") {
  const std::array<Point2, 4> square = {{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  const Homography id = fit_homography(square, square);
  CHECK((id.h - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);

  std::array<Point2, 4> moved = square;
  for (auto& p : moved) {
    p.x += 5;
    p.y += 7;
  }
  Eigen::Matrix3d t;
  t << 1, 0, 5, 0, 1, 7, 0, 0, 1;
  CHECK((fit_homography(square, moved).h - t).cwiseAbs().maxCoeff() < 1e-10);

  const std::array<Point2, 4> trapezoid = {{{0, 0}, {1, 0}, {0.8, 1}, {0.2, 1}}};
  const Homography h = fit_homography(square, trapezoid);
  for (int i = 0; i < 4; ++i) CHECK(dist(h.apply(square[i]), trapezoid[i]) < 1e-6);
}

TEST_CASE("fit_homography reproduces its correspondences on 1000 random cases") {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> u(0.0, 1000.0);
  int cases = 0;
  double worst = 0.0;
  while (cases < 1000) {
    std::array<Point2, 4> src;
    std::array<Point2, 4> dst;
    for (int i = 0; i < 4; ++i) {
      src[i] = {u(rng), u(rng)};
      dst[i] = {u(rng), u(rng)};
    }
    if (!general_position(src) || !general_position(dst)) continue;
    Homography h;
    try {
      h = fit_homography(src, dst);
    } catch (const Error&) {
      // A random quadrilateral pair can still map a finite point to
      // infinity; such draws are not non-degenerate cases.
      continue;
    }
    ++cases;
    for (int i = 0; i < 4; ++i) worst = std::max(worst, dist(h.apply(src[i]), dst[i]));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("fit_homography rejects collinear points") {
  const std::array<Point2, 4> line = {{{0, 0}, {1, 1}, {2, 2}, {0, 5}}};
  const std::array<Point2, 4> square = {{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  try {
    fit_homography(line, square);
    FAIL("expected degenerate-configuration");
  } catch (const Error& e) {
    CHECK(e.kind() == errc::kDegenerate);
  }
  CHECK_THROWS_AS(fit_homography(square, line), Error);
}

TEST_CASE("warp_mask examples") {
  BinaryMask m(20, 20);
  for (int y = 7; y < 13; ++y) {
    for (int x = 7; x < 13; ++x) m.set(x, y, true);
  }
  CHECK(warp_mask(m, Homography{}, 20, 20) == m);

  Homography shift;
  shift.h(0, 2) = 20;
  CHECK(warp_mask(m, shift, 20, 20).count() == 0);

  // 2x scaling about the center (10,10).
  Homography scale;
  scale.h << 2, 0, -10, 0, 2, -10, 0, 0, 1;
  const std::size_t area = warp_mask(m, scale, 20, 20).count();
  const std::size_t perimeter = 4 * 12;
  CHECK(std::abs(static_cast<double>(area) - 4.0 * m.count()) <= static_cast<double>(perimeter));
}

TEST_CASE("project_ground_point geometry") {
  const DepthMap depth = flat_depth(1000, 1000, 0.3f);
  const BBox box{490, 60, 510, 120, "car"};
  SunPose sun;
  sun.azimuth = 0.4;
  sun.elevation = 0.7;

  // Ground-contact points are fixed.
  const Point2 foot{500, 120};
  CHECK(project_ground_point(foot, box, depth, sun, 50) == foot);
  CHECK(project_ground_point({495, 130}, box, depth, sun, 50) == Point2{495, 130});

  // The shadow of a raised point starts at its foot on the contact row.
  const Point2 top{500, 80};
  const auto offset = [&](double elevation) {
    SunPose s = sun;
    s.elevation = elevation;
    return dist(project_ground_point(top, box, depth, s, 50), {top.x, box.y2});
  };
  CHECK(offset(std::numbers::pi / 2 - 1e-9) < 1e-6);
  double prev = offset(1.2);
  for (double e : {0.6, 0.3, 0.15}) {
    const double cur = offset(e);
    CHECK(cur > prev);
    prev = cur;
  }
  // Displacement runs opposite the sun's horizontal direction.
  const Point2 q = project_ground_point(top, box, depth, sun, 50);
  CHECK(q.x < top.x);
}
