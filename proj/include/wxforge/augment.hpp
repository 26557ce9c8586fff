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

// The seven weather and lighting augmenters.
//
// Every augmenter is a pure function of its inputs and stream: it returns
// an image of the input's size, never touches the guidance rasters, and
// rounds to 8 bits exactly once. Effects that are road-masked (reflections,
// puddles, shadows) leave every other pixel equal to the shared overcast
// step.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "wxforge/imagecore.hpp"
#include "wxforge/params.hpp"
#include "wxforge/procedural.hpp"
#include "wxforge/random.hpp"

namespace wxforge {

/// Counters filled by the augmenters when a non-null pointer is passed.
struct AugmentStats {
  std::size_t streaks_drawn = 0;
  std::size_t droplets_drawn = 0;
  std::size_t puddle_pixels = 0;
  std::size_t reflected_pixels = 0;
  std::size_t shadows_cast = 0;
  std::size_t shadows_skipped = 0;
  std::optional<SunPose> sun;
};

ImageRgb overcast(const ImageRgb& img, const SegMap& seg, double amount, const Rgb& sky_gray,
                  double sky_weight);

ImageRgb dense_fog(const ImageRgb& img, const DepthMap& depth, const SegMap& seg,
                   const FogParams& p);

ImageRgb shadow_sunglare(const ImageRgb& img, const DepthMap& depth, const SegMap& seg,
                         std::span<const BBox> boxes, const SunParams& p, RandomStream stream,
                         AugmentStats* stats = nullptr);

ImageRgb rain_streaks(const ImageRgb& img, const SegMap& seg, const RainStreakParams& p,
                      double overcast_amount, RandomStream stream, AugmentStats* stats = nullptr);

ImageRgb wet_street_lens_droplets(const ImageRgb& img, const DepthMap& depth, const SegMap& seg,
                                  const ReflectionParams& p, double overcast_amount,
                                  RandomStream stream, AugmentStats* stats = nullptr);

ImageRgb puddles(const ImageRgb& img, const DepthMap& depth, const SegMap& seg,
                 const PuddleParams& p, double overcast_amount, RandomStream stream,
                 AugmentStats* stats = nullptr);

/// overcast → wet street reflections → light fog → rain streaks → lens
/// droplets.
ImageRgb rain_composition(const ImageRgb& img, const DepthMap& depth, const SegMap& seg,
                          std::span<const BBox> boxes, const RainCompositionParams& p,
                          RandomStream stream, AugmentStats* stats = nullptr);
ImageRgb rain_composition(const ImageRgb& img, const DepthMap& depth, const SegMap& seg,
                          std::span<const BBox> boxes, int level, RandomStream stream,
                          AugmentStats* stats = nullptr);

// ---------------------------------------------------------------------------
// Dispatch

/// Guidance rasters of one source image. `depth` may be null for families
/// that do not need it (overcast, rain_streaks).
struct Scene {
  const ImageRgb* image = nullptr;
  const DepthMap* depth = nullptr;
  const SegMap* seg = nullptr;
  std::span<const BBox> boxes;
};

/// True for families that read the depth map.
bool family_needs_depth(Family f) noexcept;

/// Runs `spec` on `scene`. The stream is labelled "<image_id>/<family>".
/// Errors: missing-depth plus the family's own errors.
ImageRgb augment(const AugSpec& spec, const Scene& scene, std::string_view image_id,
                 AugmentStats* stats = nullptr);

// ---------------------------------------------------------------------------
// Building blocks exposed for tests and the preview service

/// Sun position at the centroid of the largest 4-connected sky component,
/// jittered horizontally by the stream and snapped back onto that
/// component. Azimuth follows the horizontal offset from the image center.
/// Without sky pixels the sun sits at the top center.
SunPose place_sun(const SegMap& seg, double elevation, RandomStream& stream);

/// Mean over columns of the topmost road row; height/2 without road.
int estimate_horizon_row(const SegMap& seg);

/// Pixels of `box` carrying a dynamic-object role, or all non-road,
/// non-sky pixels of the box when none do.
BinaryMask instance_mask(const SegMap& seg, const BBox& box);

/// Instance mask warped by the homography taking the box corners to their
/// ground projections. Errors: degenerate-configuration.
BinaryMask shadow_mask(const SegMap& seg, const DepthMap& depth, const BBox& box,
                       const SunPose& sun, int horizon_row);

/// Road pixels where the depth-scaled Perlin field exceeds `threshold`.
/// A threshold of -1 or less selects the whole road.
BinaryMask puddle_mask(const DepthMap& depth, const SegMap& seg, const PuddleParams& p,
                       const RandomStream& stream);

}  // namespace wxforge
