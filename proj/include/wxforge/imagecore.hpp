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
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wxforge {

/// 8-bit RGB raster, row-major, three interleaved channels.
class ImageRgb {
 public:
  ImageRgb() = default;
  /// Black image. Throws invalid-argument for non-positive sizes.
  ImageRgb(int width, int height);
  ImageRgb(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  const std::uint8_t* at(int x, int y) const noexcept { return &pixels_[offset(x, y)]; }
  std::uint8_t* at(int x, int y) noexcept { return &pixels_[offset(x, y)]; }

  friend bool operator==(const ImageRgb&, const ImageRgb&) = default;

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Floating working copy of an ImageRgb, channels in [0,1]. Augmenters
/// compose effects on this type and round to 8 bits once at the end.
class ImageF {
 public:
  ImageF() = default;
  ImageF(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  const float* at(int x, int y) const noexcept { return &data_[offset(x, y)]; }
  float* at(int x, int y) noexcept { return &data_[offset(x, y)]; }

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

/// Relative scene depth, 0 at the camera and 1 at the farthest point.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> depth;
  double max_range_m = 200.0;

  float at(int x, int y) const noexcept {
    return depth[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                 static_cast<std::size_t>(x)];
  }

  /// Throws invalid-argument on size or range violations.
  void validate() const;
};

/// Semantic roles the augmenters care about, each mapped to train ids.
struct ClassRoles {
  std::vector<std::uint8_t> sky;
  std::vector<std::uint8_t> road;
  std::vector<std::uint8_t> dynamic;

  /// 19-class Cityscapes/BDD train-id convention: road=0, sky=10,
  /// person..bicycle = 11..18.
  static ClassRoles cityscapes();

  bool is_sky(std::uint8_t id) const noexcept;
  bool is_road(std::uint8_t id) const noexcept;
  bool is_dynamic(std::uint8_t id) const noexcept;

  /// Every role id must be a palette entry (< palette_size).
  void validate(int palette_size = 19) const;
};

struct SegMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> class_ids;
  ClassRoles roles = ClassRoles::cityscapes();

  std::uint8_t at(int x, int y) const noexcept {
    return class_ids[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                     static_cast<std::size_t>(x)];
  }
  bool is_sky(int x, int y) const noexcept { return roles.is_sky(at(x, y)); }
  bool is_road(int x, int y) const noexcept { return roles.is_road(at(x, y)); }
};

struct BBox {
  double x1 = 0;
  double y1 = 0;
  double x2 = 0;
  double y2 = 0;
  std::string category;

  double width() const noexcept { return x2 - x1; }
  double height() const noexcept { return y2 - y1; }
  /// Throws invalid-argument unless 0 <= x1 < x2 <= width (same for y).
  void validate(int image_width, int image_height) const;

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Single-channel 0/1 raster.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t at(int x, int y) const noexcept {
    return bits[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                static_cast<std::size_t>(x)];
  }
  void set(int x, int y, bool v) noexcept {
    bits[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
         static_cast<std::size_t>(x)] = v ? 1 : 0;
  }
  std::size_t count() const noexcept;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

using Rgb = std::array<double, 3>;  ///< 0..255 per channel

// BT.601 luma weights.
inline constexpr float kLumaR = 0.299f;
inline constexpr float kLumaG = 0.587f;
inline constexpr float kLumaB = 0.114f;

inline float luma(const float* px) noexcept {
  return kLumaR * px[0] + kLumaG * px[1] + kLumaB * px[2];
}

ImageF to_float(const ImageRgb& img);
/// Rounds to nearest and clamps to [0,255].
ImageRgb to_u8(const ImageF& img);

/// Throws dimension-mismatch unless the rasters share width and height.
void require_same_size(int w0, int h0, int w1, int h1, const char* what);

// 8-bit operations. Each converts, runs the float kernel and rounds once.
ImageRgb desaturate(const ImageRgb& img, double amount);
ImageRgb gaussian_blur(const ImageRgb& img, double sigma);
ImageRgb blend(const ImageRgb& base, const ImageRgb& overlay, double alpha);
ImageRgb blend(const ImageRgb& base, const ImageRgb& overlay, std::span<const float> alpha);

// Float kernels used inside the augmentation pipelines.
void desaturate_inplace(ImageF& img, float amount);
ImageF gaussian_blur(const ImageF& img, double sigma);
/// Blurs a single-channel plane of `width`×`height` values.
std::vector<float> gaussian_blur_plane(std::span<const float> plane, int width, int height,
                                       double sigma);
/// Normalized 1-D kernel of radius ceil(3·sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Nearest-neighbour resize of an RGB raster.
ImageRgb resize_nearest(const ImageRgb& img, int width, int height);

}  // namespace wxforge
