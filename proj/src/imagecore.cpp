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

#include "wxforge/imagecore.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "wxforge/error.hpp"

namespace wxforge {

namespace {

void require_positive_size(int width, int height) {
  if (width < 1 || height < 1) {
    throw Error(errc::kInvalidArgument,
                fmt::format("image size must be positive, got {}x{}", width, height));
  }
}

void require_fraction(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(errc::kInvalidArgument, fmt::format("{} must lie in [0,1], got {}", name, v));
  }
}

inline std::uint8_t quantize(float v) noexcept {
  const float scaled = std::round(v * 255.0f);
  return static_cast<std::uint8_t>(std::clamp(scaled, 0.0f, 255.0f));
}

bool contains(const std::vector<std::uint8_t>& ids, std::uint8_t id) noexcept {
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

// One separable pass along rows (horizontal == true) or columns with edge
// clamping. `channels` interleaved values per pixel.
std::vector<float> convolve_pass(std::span<const float> src, int width, int height, int channels,
                                 const std::vector<double>& kernel, bool horizontal) {
  const int radius = static_cast<int>(kernel.size() / 2);
  std::vector<float> dst(src.size());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          int sx = x;
          int sy = y;
          if (horizontal) {
            sx = std::clamp(x + k, 0, width - 1);
          } else {
            sy = std::clamp(y + k, 0, height - 1);
          }
          acc += kernel[static_cast<std::size_t>(k + radius)] *
                 src[(static_cast<std::size_t>(sy) * width + sx) * channels + c];
        }
        dst[(static_cast<std::size_t>(y) * width + x) * channels + c] = static_cast<float>(acc);
      }
    }
  }
  return dst;
}

}  // namespace

ImageRgb::ImageRgb(int width, int height) : width_(width), height_(height) {
  require_positive_size(width, height);
  pixels_.assign(pixel_count() * 3, 0);
}

ImageRgb::ImageRgb(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  require_positive_size(width, height);
  if (pixels_.size() != pixel_count() * 3) {
    throw Error(errc::kInvalidArgument,
                fmt::format("pixel buffer holds {} bytes, {}x{} RGB needs {}", pixels_.size(),
                            width, height, pixel_count() * 3));
  }
}

ImageF::ImageF(int width, int height) : width_(width), height_(height) {
  require_positive_size(width, height);
  data_.assign(pixel_count() * 3, 0.0f);
}

void DepthMap::validate() const {
  require_positive_size(width, height);
  if (depth.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(errc::kInvalidArgument, "depth buffer size does not match its dimensions");
  }
  for (float d : depth) {
    if (!(d >= 0.0f && d <= 1.0f)) {
      throw Error(errc::kInvalidArgument, fmt::format("depth value {} outside [0,1]", d));
    }
  }
  if (!(max_range_m > 0.0)) {
    throw Error(errc::kInvalidArgument, "max_range_m must be positive");
  }
}

ClassRoles ClassRoles::cityscapes() {
  return ClassRoles{{10}, {0}, {11, 12, 13, 14, 15, 16, 17, 18}};
}

bool ClassRoles::is_sky(std::uint8_t id) const noexcept { return contains(sky, id); }
bool ClassRoles::is_road(std::uint8_t id) const noexcept { return contains(road, id); }
bool ClassRoles::is_dynamic(std::uint8_t id) const noexcept { return contains(dynamic, id); }

void ClassRoles::validate(int palette_size) const {
  for (const auto* ids : {&sky, &road, &dynamic}) {
    for (std::uint8_t id : *ids) {
      if (id >= palette_size) {
        throw Error(errc::kInvalidArgument,
                    fmt::format("class role id {} is outside the {}-class palette", id,
                                palette_size));
      }
    }
  }
}

void BBox::validate(int image_width, int image_height) const {
  const bool ok = x1 >= 0 && x1 < x2 && x2 <= image_width && y1 >= 0 && y1 < y2 &&
                  y2 <= image_height;
  if (!ok) {
    throw Error(errc::kInvalidArgument,
                fmt::format("bbox ({},{})-({},{}) invalid for {}x{} image", x1, y1, x2, y2,
                            image_width, image_height));
  }
}

std::size_t BinaryMask::count() const noexcept {
  return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(),
                                                [](std::uint8_t b) { return b != 0; }));
}

ImageF to_float(const ImageRgb& img) {
  ImageF out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = static_cast<float>(src[i]) / 255.0f;
  }
  return out;
}

ImageRgb to_u8(const ImageF& img) {
  std::vector<std::uint8_t> px(img.data().size());
  auto src = img.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    px[i] = quantize(src[i]);
  }
  return ImageRgb(img.width(), img.height(), std::move(px));
}

void require_same_size(int w0, int h0, int w1, int h1, const char* what) {
  if (w0 != w1 || h0 != h1) {
    throw Error(errc::kDimensionMismatch,
                fmt::format("{}: {}x{} does not match {}x{}", what, w1, h1, w0, h0));
  }
}

void desaturate_inplace(ImageF& img, float amount) {
  auto data = img.data();
  for (std::size_t i = 0; i < data.size(); i += 3) {
    const float l = luma(&data[i]);
    for (int c = 0; c < 3; ++c) {
      data[i + c] += amount * (l - data[i + c]);
    }
  }
}

ImageRgb desaturate(const ImageRgb& img, double amount) {
  require_fraction(amount, "desaturation amount");
  ImageF f = to_float(img);
  desaturate_inplace(f, static_cast<float>(amount));
  return to_u8(f);
}

std::vector<double> gaussian_kernel(double sigma) {
  if (sigma <= 0.0) {
    return {1.0};
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) {
    v /= sum;
  }
  return k;
}

ImageF gaussian_blur(const ImageF& img, double sigma) {
  if (sigma < 0.0) {
    throw Error(errc::kInvalidArgument, fmt::format("blur sigma must be >= 0, got {}", sigma));
  }
  if (sigma == 0.0) {
    return img;
  }
  const auto kernel = gaussian_kernel(sigma);
  auto tmp = convolve_pass(img.data(), img.width(), img.height(), 3, kernel, true);
  auto out_data = convolve_pass(tmp, img.width(), img.height(), 3, kernel, false);
  ImageF out(img.width(), img.height());
  std::copy(out_data.begin(), out_data.end(), out.data().begin());
  return out;
}

std::vector<float> gaussian_blur_plane(std::span<const float> plane, int width, int height,
                                       double sigma) {
  if (sigma <= 0.0) {
    return {plane.begin(), plane.end()};
  }
  const auto kernel = gaussian_kernel(sigma);
  auto tmp = convolve_pass(plane, width, height, 1, kernel, true);
  return convolve_pass(tmp, width, height, 1, kernel, false);
}

ImageRgb gaussian_blur(const ImageRgb& img, double sigma) {
  if (sigma < 0.0) {
    throw Error(errc::kInvalidArgument, fmt::format("blur sigma must be >= 0, got {}", sigma));
  }
  if (sigma == 0.0) {
    return img;
  }
  return to_u8(gaussian_blur(to_float(img), sigma));
}

ImageRgb blend(const ImageRgb& base, const ImageRgb& overlay, double alpha) {
  require_same_size(base.width(), base.height(), overlay.width(), overlay.height(), "blend");
  require_fraction(alpha, "blend alpha");
  const std::vector<float> plane(base.pixel_count(), static_cast<float>(alpha));
  return blend(base, overlay, plane);
}

ImageRgb blend(const ImageRgb& base, const ImageRgb& overlay, std::span<const float> alpha) {
  require_same_size(base.width(), base.height(), overlay.width(), overlay.height(), "blend");
  if (alpha.size() != base.pixel_count()) {
    throw Error(errc::kDimensionMismatch, "blend: alpha plane size does not match the image");
  }
  ImageF a = to_float(base);
  const ImageF b = to_float(overlay);
  auto ad = a.data();
  auto bd = b.data();
  for (std::size_t p = 0; p < alpha.size(); ++p) {
    const float w = alpha[p];
    if (!(w >= 0.0f && w <= 1.0f)) {
      throw Error(errc::kInvalidArgument, fmt::format("blend alpha {} outside [0,1]", w));
    }
    for (int c = 0; c < 3; ++c) {
      const std::size_t i = p * 3 + c;
      ad[i] = (1.0f - w) * ad[i] + w * bd[i];
    }
  }
  return to_u8(a);
}

ImageRgb resize_nearest(const ImageRgb& img, int width, int height) {
  ImageRgb out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(img.height() - 1, static_cast<int>((y + 0.5) * img.height() / height));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(img.width() - 1, static_cast<int>((x + 0.5) * img.width() / width));
      std::copy_n(img.at(sx, sy), 3, out.at(x, y));
    }
  }
  return out;
}

}  // namespace wxforge
