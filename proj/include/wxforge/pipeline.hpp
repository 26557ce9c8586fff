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

// Loading source scenes from disk and running whole manifests.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wxforge/augment.hpp"
#include "wxforge/imagecore.hpp"
#include "wxforge/manifest.hpp"

namespace wxforge {

/// A source image with its guidance rasters, owned.
struct LoadedScene {
  std::string image_id;
  ImageRgb image;
  SegMap seg;
  std::optional<DepthMap> depth;
  std::vector<BBox> boxes;

  Scene view() const noexcept;
};

/// Errors: io-error, decode-error, dimension-mismatch, missing-depth (when
/// `need_depth` and the record has no depth map).
LoadedScene load_scene(const SourceRecord& record, bool need_depth);

/// Copy whose longer edge is at most `max_edge`. The image is area-averaged,
/// labels and depth are sampled at the nearest source pixel, boxes scaled.
LoadedScene downscale_scene(const LoadedScene& scene, int max_edge);

/// Area-average downscale of an RGB raster; larger targets are an error.
ImageRgb resize_area(const ImageRgb& img, int width, int height);

/// Augments every entry of `manifest` and writes its output PNG. Boxes and
/// raster paths come from the record with the same image id. Entries are
/// independent, so the output bytes do not depend on `workers`.
/// Errors: missing-label (no record for an entry), plus load and augment
/// errors of the first failing entry.
std::vector<AugmentStats> run_manifest(const AugManifest& manifest,
                                       std::span<const SourceRecord> records, int workers);

}  // namespace wxforge
