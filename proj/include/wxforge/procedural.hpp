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

#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>

#include "wxforge/imagecore.hpp"
#include "wxforge/random.hpp"

namespace wxforge {

struct Point2 {
  double x = 0;
  double y = 0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

// ---------------------------------------------------------------------------
// Perlin noise

/// Classic gradient-lattice Perlin noise with a permutation table drawn from
/// a RandomStream. Values lie in [-1,1] and vanish on lattice nodes.
class PerlinNoise {
 public:
  explicit PerlinNoise(RandomStream stream);

  /// Single octave at lattice coordinates (u, v).
  double lattice(double u, double v) const noexcept;

  /// fBm sum of `octaves` octaves starting at `frequency` cycles/pixel,
  /// doubling frequency and halving amplitude, normalized to [-1,1].
  double sample(double x, double y, double frequency, int octaves) const noexcept;

 private:
  std::array<std::uint8_t, 512> perm_{};
};

/// One-shot convenience wrapper around PerlinNoise. Throws invalid-argument
/// for frequency <= 0 or octaves < 1.
double perlin2d(double x, double y, double frequency, int octaves, const RandomStream& stream);

// ---------------------------------------------------------------------------
// Homography

struct Homography {
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();  ///< h(2,2) == 1

  Point2 apply(Point2 p) const noexcept;
  Homography inverse() const;
};

/// Direct linear transform from four exact correspondences, solved on
/// Hartley-normalized coordinates with partial pivoting.
/// Throws degenerate-configuration when three points of either quad are
/// collinear or the solution is singular.
Homography fit_homography(const std::array<Point2, 4>& src, const std::array<Point2, 4>& dst);

/// Inverse-mapped nearest-neighbour warp. Output pixels whose preimage
/// falls outside the source are 0.
BinaryMask warp_mask(const BinaryMask& mask, const Homography& h, int out_width, int out_height);

// ---------------------------------------------------------------------------
// Sun and ground geometry

/// Azimuth is measured in the image plane: 0 means the sun sits straight
/// ahead (toward the horizon), positive values move it to the right.
struct SunPose {
  double azimuth = 0;
  double elevation = 0.7;
  Point2 image_xy;
};

/// Image-space shadow anchor of `p` for an object standing on the ground
/// row `box.y2`. The anchor is the point's ground contact (p.x, box.y2)
/// displaced away from the sun by height·cot(elevation), where height is
/// the pixel distance above the contact row. The vertical component is
/// foreshortened by 1 - 0.5·depth at the contact point. Points on or below
/// the contact row map to themselves; results are clamped to the image and
/// kept at or below `horizon_row`.
Point2 project_ground_point(Point2 p, const BBox& box, const DepthMap& depth, const SunPose& sun,
                            int horizon_row);

}  // namespace wxforge
