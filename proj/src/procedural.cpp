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

#include "wxforge/procedural.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/LU>
#include <fmt/format.h>

#include "wxforge/error.hpp"

namespace wxforge {

std::uint64_t RandomStream::below(std::uint64_t n) noexcept {
  if (n == 0) {
    return 0;
  }
  // Lemire's multiply-shift; the slight bias is irrelevant for n << 2^64.
  __extension__ using u128 = unsigned __int128;
  return static_cast<std::uint64_t>((static_cast<u128>(next_u64()) * n) >> 64);
}

double RandomStream::normal() noexcept {
  double u1 = uniform();
  while (u1 <= 0.0) {
    u1 = uniform();
  }
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Eight unit gradients at 45 degree steps.
constexpr std::array<std::array<double, 2>, 8> kGradients = {{
    {1.0, 0.0},
    {kInvSqrt2, kInvSqrt2},
    {0.0, 1.0},
    {-kInvSqrt2, kInvSqrt2},
    {-1.0, 0.0},
    {-kInvSqrt2, -kInvSqrt2},
    {0.0, -1.0},
    {kInvSqrt2, -kInvSqrt2},
}};

inline double fade(double t) noexcept { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

inline double lerp(double a, double b, double t) noexcept { return a + t * (b - a); }

}  // namespace

PerlinNoise::PerlinNoise(RandomStream stream) {
  std::array<std::uint8_t, 256> p{};
  for (int i = 0; i < 256; ++i) {
    p[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
  }
  for (std::size_t i = 255; i > 0; --i) {
    const std::size_t j = stream.below(i + 1);
    std::swap(p[i], p[j]);
  }
  for (std::size_t i = 0; i < 512; ++i) {
    perm_[i] = p[i & 255];
  }
}

double PerlinNoise::lattice(double u, double v) const noexcept {
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const int xi = static_cast<int>(static_cast<std::int64_t>(fu) & 255);
  const int yi = static_cast<int>(static_cast<std::int64_t>(fv) & 255);
  const double xf = u - fu;
  const double yf = v - fv;

  auto corner = [&](int dx, int dy) {
    const int h = perm_[static_cast<std::size_t>(perm_[static_cast<std::size_t>(xi + dx)] + yi + dy)] & 7;
    const auto& g = kGradients[static_cast<std::size_t>(h)];
    return g[0] * (xf - dx) + g[1] * (yf - dy);
  };

  const double su = fade(xf);
  const double sv = fade(yf);
  const double bottom = lerp(corner(0, 0), corner(1, 0), su);
  const double top = lerp(corner(0, 1), corner(1, 1), su);
  // Unit gradients bound classic 2-D Perlin by 1/sqrt(2).
  const double value = lerp(bottom, top, sv) / kInvSqrt2;
  return std::clamp(value, -1.0, 1.0);
}

double PerlinNoise::sample(double x, double y, double frequency, int octaves) const noexcept {
  double sum = 0.0;
  double norm = 0.0;
  double amplitude = 1.0;
  double f = frequency;
  for (int o = 0; o < octaves; ++o) {
    sum += amplitude * lattice(x * f, y * f);
    norm += amplitude;
    amplitude *= 0.5;
    f *= 2.0;
  }
  return std::clamp(sum / norm, -1.0, 1.0);
}

double perlin2d(double x, double y, double frequency, int octaves, const RandomStream& stream) {
  if (!(frequency > 0.0)) {
    throw Error(errc::kInvalidArgument, fmt::format("perlin frequency must be > 0, got {}", frequency));
  }
  if (octaves < 1) {
    throw Error(errc::kInvalidArgument, fmt::format("perlin octaves must be >= 1, got {}", octaves));
  }
  return PerlinNoise(stream).sample(x, y, frequency, octaves);
}

// ---------------------------------------------------------------------------

Point2 Homography::apply(Point2 p) const noexcept {
  const Eigen::Vector3d q = h * Eigen::Vector3d(p.x, p.y, 1.0);
  return {q.x() / q.z(), q.y() / q.z()};
}

Homography Homography::inverse() const {
  const Eigen::Matrix3d inv = h.inverse();
  if (!inv.allFinite() || std::abs(inv(2, 2)) < 1e-300) {
    throw Error(errc::kDegenerate, "homography is not invertible");
  }
  return Homography{inv / inv(2, 2)};
}

namespace {

double cross(const Point2& a, const Point2& b, const Point2& c) noexcept {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

void require_general_position(const std::array<Point2, 4>& pts, const char* which) {
  double extent = 0.0;
  for (const auto& p : pts) {
    for (const auto& q : pts) {
      extent = std::max({extent, std::abs(p.x - q.x), std::abs(p.y - q.y)});
    }
  }
  const double tol = 1e-9 * std::max(extent * extent, 1e-300);
  constexpr int kTriples[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  for (const auto& t : kTriples) {
    if (extent == 0.0 || std::abs(cross(pts[t[0]], pts[t[1]], pts[t[2]])) <= tol) {
      throw Error(errc::kDegenerate,
                  fmt::format("{} points {}, {}, {} are collinear", which, t[0], t[1], t[2]));
    }
  }
}

// Similarity taking the points to zero centroid and mean distance sqrt(2).
Eigen::Matrix3d normalizing_transform(const std::array<Point2, 4>& pts) {
  double cx = 0.0;
  double cy = 0.0;
  for (const auto& p : pts) {
    cx += p.x;
    cy += p.y;
  }
  cx /= 4.0;
  cy /= 4.0;
  double mean_dist = 0.0;
  for (const auto& p : pts) {
    mean_dist += std::hypot(p.x - cx, p.y - cy);
  }
  mean_dist /= 4.0;
  const double s = std::numbers::sqrt2 / mean_dist;
  Eigen::Matrix3d t;
  t << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
  return t;
}

Point2 transform(const Eigen::Matrix3d& t, const Point2& p) {
  const Eigen::Vector3d q = t * Eigen::Vector3d(p.x, p.y, 1.0);
  return {q.x() / q.z(), q.y() / q.z()};
}

}  // namespace

Homography fit_homography(const std::array<Point2, 4>& src, const std::array<Point2, 4>& dst) {
  require_general_position(src, "source");
  require_general_position(dst, "destination");

  const Eigen::Matrix3d ts = normalizing_transform(src);
  const Eigen::Matrix3d td = normalizing_transform(dst);

  Eigen::Matrix<double, 8, 8> a;
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const Point2 s = transform(ts, src[static_cast<std::size_t>(i)]);
    const Point2 d = transform(td, dst[static_cast<std::size_t>(i)]);
    a.row(2 * i) << s.x, s.y, 1, 0, 0, 0, -d.x * s.x, -d.x * s.y;
    a.row(2 * i + 1) << 0, 0, 0, s.x, s.y, 1, -d.y * s.x, -d.y * s.y;
    b(2 * i) = d.x;
    b(2 * i + 1) = d.y;
  }
  const Eigen::PartialPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
  if (!std::isfinite(lu.determinant()) || std::abs(lu.determinant()) < 1e-12) {
    throw Error(errc::kDegenerate, "DLT system is singular");
  }
  const Eigen::Matrix<double, 8, 1> sol = lu.solve(b);

  Eigen::Matrix3d hn;
  hn << sol(0), sol(1), sol(2), sol(3), sol(4), sol(5), sol(6), sol(7), 1.0;
  Eigen::Matrix3d h = td.inverse() * hn * ts;
  if (!h.allFinite() || std::abs(h(2, 2)) < 1e-12) {
    throw Error(errc::kDegenerate, "homography maps the source origin to infinity");
  }
  h /= h(2, 2);
  if (std::abs(h.determinant()) <= 1e-12) {
    throw Error(errc::kDegenerate, "homography is singular");
  }
  return Homography{h};
}

BinaryMask warp_mask(const BinaryMask& mask, const Homography& h, int out_width, int out_height) {
  BinaryMask out(out_width, out_height);
  const Homography inv = h.inverse();
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const Point2 s = inv.apply({static_cast<double>(x), static_cast<double>(y)});
      if (!std::isfinite(s.x) || !std::isfinite(s.y)) {
        continue;
      }
      const double rx = std::round(s.x);
      const double ry = std::round(s.y);
      if (rx < 0 || ry < 0 || rx >= mask.width || ry >= mask.height) {
        continue;
      }
      if (mask.at(static_cast<int>(rx), static_cast<int>(ry)) != 0) {
        out.set(x, y, true);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Point2 project_ground_point(Point2 p, const BBox& box, const DepthMap& depth, const SunPose& sun,
                            int horizon_row) {
  const double contact_row = box.y2;
  const double height_px = contact_row - p.y;
  if (height_px <= 0.0) {
    return p;
  }
  const int cx = std::clamp(static_cast<int>(std::lround(p.x)), 0, depth.width - 1);
  const int cy = std::clamp(static_cast<int>(std::lround(contact_row)) - 1, 0, depth.height - 1);
  const double foreshortening = 1.0 - 0.5 * static_cast<double>(depth.at(cx, cy));

  const double length = height_px * std::cos(sun.elevation) / std::sin(sun.elevation);
  const double dx = -std::sin(sun.azimuth) * length;
  const double dy = std::cos(sun.azimuth) * length * foreshortening;

  Point2 out{p.x + dx, contact_row + dy};
  out.x = std::clamp(out.x, 0.0, static_cast<double>(depth.width));
  out.y = std::clamp(out.y, std::max(0.0, static_cast<double>(horizon_row)),
                     static_cast<double>(depth.height));
  return out;
}

}  // namespace wxforge
