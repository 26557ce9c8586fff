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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "wxforge/imagecore.hpp"

namespace wxforge {

/// Single-channel raster as stored on disk (8- or 16-bit).
struct GrayRaster {
  int width = 0;
  int height = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> values;
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

/// PNG (any color type, 8/16-bit) or JPEG, sniffed by signature.
/// Errors: io-error, decode-error.
ImageRgb load_image(const std::filesystem::path& path);
ImageRgb decode_image(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_png(const ImageRgb& img);
void save_png(const ImageRgb& img, const std::filesystem::path& path);

/// Single-channel PNG. Palette images are returned as their indices.
/// Errors: io-error, decode-error, channel-error.
GrayRaster load_gray_png(const std::filesystem::path& path);
GrayRaster decode_gray_png(std::span<const std::uint8_t> bytes);
void save_gray_png(const GrayRaster& raster, const std::filesystem::path& path);

/// Reads relative inverse depth (larger = nearer) and converts it to
/// relative depth: depth = 1 - stored / stored_max.
DepthMap load_depth(const std::filesystem::path& path, double max_range_m = 200.0);
DepthMap depth_from_gray(const GrayRaster& raster, double max_range_m = 200.0);

/// Single-channel class-id PNG.
SegMap load_seg(const std::filesystem::path& path, ClassRoles roles = ClassRoles::cityscapes());

}  // namespace wxforge
