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

#include "wxforge/augment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "wxforge/error.hpp"

namespace wxforge {

namespace {

constexpr float kInv255 = 1.0f / 255.0f;

// Roughness of the mirror inside puddles, which are smoother than wet
// asphalt.
constexpr double kPuddleRoughness = 1.0;
constexpr float kPuddleDarkening = 0.06f;
// Fraction of an object's luma removed at the side facing away from the sun,
// per unit shadow_strength.
constexpr double kSideShading = 0.5;
constexpr std::array<double, 3> kGlareTint = {1.0, 0.95, 0.85};

void check_seg(const ImageRgb& img, const SegMap& seg) {
  require_same_size(img.width(), img.height(), seg.width, seg.height, "segmentation");
  if (seg.class_ids.size() != img.pixel_count()) {
    throw Error(errc::kDimensionMismatch, "segmentation buffer does not match its size");
  }
}

void check_depth(const ImageRgb& img, const DepthMap& depth) {
  require_same_size(img.width(), img.height(), depth.width, depth.height, "depth map");
  if (depth.depth.size() != img.pixel_count()) {
    throw Error(errc::kDimensionMismatch, "depth buffer does not match its size");
  }
}

void require_road_role(const SegMap& seg) {
  if (seg.roles.road.empty()) {
    throw Error(errc::kMissingRoadRole, "segmentation roles define no road class");
  }
}

void require_sky_role(const SegMap& seg) {
  if (seg.roles.sky.empty()) {
    throw Error(errc::kMissingSkyRole, "segmentation roles define no sky class");
  }
}

// Desaturation by `amount`, then sky pixels pulled toward `gray`.
void apply_overcast(ImageF& f, const SegMap& seg, double amount, const Rgb& gray,
                    double sky_weight) {
  if (amount > 0.0) {
    desaturate_inplace(f, static_cast<float>(amount));
  }
  if (sky_weight <= 0.0) {
    return;
  }
  const auto w = static_cast<float>(sky_weight);
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      if (!seg.is_sky(x, y)) {
        continue;
      }
      float* px = f.at(x, y);
      for (int c = 0; c < 3; ++c) {
        px[c] += w * (static_cast<float>(gray[static_cast<std::size_t>(c)]) * kInv255 - px[c]);
      }
    }
  }
}

void apply_shared_overcast(ImageF& f, const SegMap& seg, double amount) {
  apply_overcast(f, seg, amount, kDefaultSkyGray, amount);
}

// Scattering followed by a transmittance-indexed blend of four pre-blurred
// copies at sigma 0, s/3, 2s/3 and s.
void apply_fog(ImageF& f, const DepthMap& depth, const FogParams& p) {
  const std::size_t n = f.pixel_count();
  std::vector<float> t(n);
  const std::array<float, 3> air = {static_cast<float>(p.airlight[0]) * kInv255,
                                    static_cast<float>(p.airlight[1]) * kInv255,
                                    static_cast<float>(p.airlight[2]) * kInv255};
  auto data = f.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = p.beta * static_cast<double>(depth.depth[i]) * depth.max_range_m;
    t[i] = static_cast<float>(std::exp(-tau));
    for (std::size_t c = 0; c < 3; ++c) {
      float& v = data[3 * i + c];
      v = v * t[i] + air[c] * (1.0f - t[i]);
    }
  }
  if (p.blur_sigma_max <= 0.0) {
    return;
  }
  constexpr int kLevels = 4;
  std::array<ImageF, kLevels> pyramid;
  pyramid[0] = f;
  for (int k = 1; k < kLevels; ++k) {
    pyramid[static_cast<std::size_t>(k)] =
        gaussian_blur(f, p.blur_sigma_max * static_cast<double>(k) / (kLevels - 1));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const float q = (1.0f - t[i]) * static_cast<float>(kLevels - 1);
    const int k0 = std::min(static_cast<int>(q), kLevels - 2);
    const float frac = q - static_cast<float>(k0);
    const auto lo = pyramid[static_cast<std::size_t>(k0)].data();
    const auto hi = pyramid[static_cast<std::size_t>(k0 + 1)].data();
    for (std::size_t c = 0; c < 3; ++c) {
      data[3 * i + c] = lo[3 * i + c] + frac * (hi[3 * i + c] - lo[3 * i + c]);
    }
  }
}

// Row with the largest mean depth, where the ground plane recedes to the
// horizon.
int horizon_from_depth(const DepthMap& depth) {
  int best = depth.height / 2;
  double best_mean = -1.0;
  for (int y = 0; y < depth.height; ++y) {
    double sum = 0.0;
    for (int x = 0; x < depth.width; ++x) {
      sum += depth.at(x, y);
    }
    const double mean = sum / depth.width;
    if (mean > best_mean) {
      best_mean = mean;
      best = y;
    }
  }
  return best;
}

// Planar mirror about the per-column road boundary. Only road pixels inside
// `region` (all road when null) are modified.
void apply_reflection(ImageF& f, const SegMap& seg, const DepthMap* depth,
                      const BinaryMask* region, double reflectivity, double roughness,
                      float darkening, AugmentStats* stats) {
  if (reflectivity <= 0.0 && darkening == 0.0f) {
    return;
  }
  const ImageF source = roughness > 0.0 ? gaussian_blur(f, roughness) : f;
  const int w = f.width();
  const int h = f.height();
  const auto r = static_cast<float>(reflectivity);
  const int fallback = depth != nullptr ? horizon_from_depth(*depth) : h / 2;
  std::size_t reflected = 0;
  for (int x = 0; x < w; ++x) {
    int boundary = -1;
    for (int y = 0; y < h; ++y) {
      if (seg.is_road(x, y)) {
        boundary = y;
        break;
      }
    }
    if (boundary < 0) {
      continue;
    }
    if (boundary == 0) {
      boundary = fallback;
    }
    for (int y = boundary; y < h; ++y) {
      if (!seg.is_road(x, y) || (region != nullptr && region->at(x, y) == 0)) {
        continue;
      }
      const int sy = 2 * boundary - 1 - y;
      if (sy < 0) {
        continue;
      }
      float* px = f.at(x, y);
      const float* src = source.at(x, sy);
      for (int c = 0; c < 3; ++c) {
        px[c] = (px[c] * (1.0f - r) + src[c] * r) * (1.0f - darkening);
      }
      ++reflected;
    }
  }
  if (stats != nullptr) {
    stats->reflected_pixels += reflected;
  }
}

double segment_distance(double px, double py, double ax, double ay, double bx, double by,
                        double* along) {
  const double vx = bx - ax;
  const double vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  *along = t;
  return std::hypot(px - (ax + t * vx), py - (ay + t * vy));
}

// Anti-aliased one-pixel lines whose opacity ramps up toward the leading
// end.
void draw_streaks(ImageF& f, const RainStreakParams& p, RandomStream& stream,
                  AugmentStats* stats) {
  const double megapixels = static_cast<double>(f.pixel_count()) / 1e6;
  const auto n = static_cast<std::size_t>(std::llround(p.count * megapixels));
  const std::array<float, 3> color = {static_cast<float>(p.streak_color[0]) * kInv255,
                                      static_cast<float>(p.streak_color[1]) * kInv255,
                                      static_cast<float>(p.streak_color[2]) * kInv255};
  const int w = f.width();
  const int h = f.height();
  for (std::size_t i = 0; i < n; ++i) {
    const double x0 = stream.uniform(0.0, w);
    const double y0 = stream.uniform(0.0, h);
    const double len = stream.uniform(p.length_px.lo, p.length_px.hi);
    const double ang = p.angle + p.angle_jitter * stream.uniform(-1.0, 1.0);
    const double alpha = p.alpha * stream.uniform(0.6, 1.0);
    const double x1 = x0 + std::sin(ang) * len;
    const double y1 = y0 + std::cos(ang) * len;

    const int xa = std::max(0, static_cast<int>(std::floor(std::min(x0, x1))) - 1);
    const int xb = std::min(w - 1, static_cast<int>(std::ceil(std::max(x0, x1))) + 1);
    const int ya = std::max(0, static_cast<int>(std::floor(std::min(y0, y1))) - 1);
    const int yb = std::min(h - 1, static_cast<int>(std::ceil(std::max(y0, y1))) + 1);
    for (int y = ya; y <= yb; ++y) {
      for (int x = xa; x <= xb; ++x) {
        double along = 0.0;
        const double d = segment_distance(x, y, x0, y0, x1, y1, &along);
        const double cov = 1.0 - d;
        if (cov <= 0.0) {
          continue;
        }
        const auto a = static_cast<float>(alpha * cov * (0.35 + 0.65 * along));
        float* px = f.at(x, y);
        for (int c = 0; c < 3; ++c) {
          px[c] += a * (color[static_cast<std::size_t>(c)] - px[c]);
        }
      }
    }
  }
  if (stats != nullptr) {
    stats->streaks_drawn += n;
  }
}

void sample_bilinear(const ImageF& img, double x, double y, float out[3]) {
  x = std::clamp(x, 0.0, static_cast<double>(img.width() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(img.height() - 1));
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const auto fx = static_cast<float>(x - x0);
  const auto fy = static_cast<float>(y - y0);
  for (int c = 0; c < 3; ++c) {
    const float top = img.at(x0, y0)[c] + fx * (img.at(x1, y0)[c] - img.at(x0, y0)[c]);
    const float bot = img.at(x0, y1)[c] + fx * (img.at(x1, y1)[c] - img.at(x0, y1)[c]);
    out[c] = top + fy * (bot - top);
  }
}

// Droplets on the lens act as small inverted wide-angle lenses onto a
// defocused view of the scene behind them.
void draw_droplets(ImageF& f, int count, const Range& radius, double alpha, RandomStream& stream,
                   AugmentStats* stats) {
  if (count <= 0) {
    return;
  }
  const ImageF defocused = gaussian_blur(f, 1.5);
  const int w = f.width();
  const int h = f.height();
  for (int i = 0; i < count; ++i) {
    const double cx = stream.uniform(0.0, w);
    const double cy = stream.uniform(0.0, h);
    const double r = stream.uniform(radius.lo, radius.hi);
    if (r < 0.5) {
      continue;
    }
    const int xa = std::max(0, static_cast<int>(std::floor(cx - r)));
    const int xb = std::min(w - 1, static_cast<int>(std::ceil(cx + r)));
    const int ya = std::max(0, static_cast<int>(std::floor(cy - r)));
    const int yb = std::min(h - 1, static_cast<int>(std::ceil(cy + r)));
    for (int y = ya; y <= yb; ++y) {
      for (int x = xa; x <= xb; ++x) {
        const double dx = x - cx;
        const double dy = y - cy;
        const double rho = std::hypot(dx, dy) / r;
        if (rho >= 1.0) {
          continue;
        }
        float refr[3];
        sample_bilinear(defocused, cx - 1.6 * dx, cy - 1.6 * dy - 0.5 * r, refr);
        const auto gain = static_cast<float>(rho > 0.8 ? 0.8 : 1.05 - 0.2 * rho);
        const auto a = static_cast<float>(alpha * (1.0 - std::pow(rho, 4.0)));
        float* px = f.at(x, y);
        for (int c = 0; c < 3; ++c) {
          px[c] = px[c] * (1.0f - a) + std::min(1.0f, refr[c] * gain) * a;
        }
      }
    }
  }
  if (stats != nullptr) {
    stats->droplets_drawn += static_cast<std::size_t>(count);
  }
}

BinaryMask clipped_box_mask(int w, int h, const BBox& box, int* x0, int* y0, int* x1, int* y1) {
  *x0 = std::clamp(static_cast<int>(std::ceil(box.x1)), 0, w);
  *y0 = std::clamp(static_cast<int>(std::ceil(box.y1)), 0, h);
  *x1 = std::clamp(static_cast<int>(std::ceil(box.x2)), 0, w);
  *y1 = std::clamp(static_cast<int>(std::ceil(box.y2)), 0, h);
  return BinaryMask(w, h);
}

}  // namespace

// ---------------------------------------------------------------------------

SunPose place_sun(const SegMap& seg, double elevation, RandomStream& stream) {
  const int w = seg.width;
  const int h = seg.height;
  std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
  std::vector<std::size_t> best_pixels;
  std::vector<std::size_t> queue;
  int next = 0;
  for (int start = 0; start < w * h; ++start) {
    if (label[static_cast<std::size_t>(start)] >= 0 ||
        !seg.roles.is_sky(seg.class_ids[static_cast<std::size_t>(start)])) {
      continue;
    }
    queue.clear();
    queue.push_back(static_cast<std::size_t>(start));
    label[static_cast<std::size_t>(start)] = next;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const int i = static_cast<int>(queue[q]);
      const int x = i % w;
      const int y = i / w;
      const int nbrs[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
      for (const auto& nb : nbrs) {
        if (nb[0] < 0 || nb[1] < 0 || nb[0] >= w || nb[1] >= h) {
          continue;
        }
        const auto j = static_cast<std::size_t>(nb[1] * w + nb[0]);
        if (label[j] < 0 && seg.roles.is_sky(seg.class_ids[j])) {
          label[j] = next;
          queue.push_back(j);
        }
      }
    }
    if (queue.size() > best_pixels.size()) {
      best_pixels = queue;
    }
    ++next;
  }

  SunPose sun;
  sun.elevation = elevation;
  if (best_pixels.empty()) {
    sun.image_xy = {w / 2.0, 0.0};
    return sun;
  }
  double cx = 0.0;
  double cy = 0.0;
  int min_x = w;
  int max_x = -1;
  for (std::size_t i : best_pixels) {
    const int x = static_cast<int>(i) % w;
    cx += x;
    cy += static_cast<int>(i) / w;
    min_x = std::min(min_x, x);
    max_x = std::max(max_x, x);
  }
  cx /= static_cast<double>(best_pixels.size());
  cy /= static_cast<double>(best_pixels.size());
  cx += stream.uniform(-0.1, 0.1) * (max_x - min_x + 1);

  std::size_t nearest = best_pixels.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i : best_pixels) {
    const double dx = static_cast<double>(static_cast<int>(i) % w) - cx;
    const double dy = static_cast<double>(static_cast<int>(i) / w) - cy;
    const double d = dx * dx + dy * dy;
    if (d < best_d) {
      best_d = d;
      nearest = i;
    }
  }
  const int sx = static_cast<int>(nearest) % w;
  const int sy = static_cast<int>(nearest) / w;
  sun.image_xy = {static_cast<double>(sx), static_cast<double>(sy)};
  sun.azimuth = ((sx + 0.5) / w - 0.5) * (std::numbers::pi / 2.0);
  return sun;
}

int estimate_horizon_row(const SegMap& seg) {
  double sum = 0.0;
  int columns = 0;
  for (int x = 0; x < seg.width; ++x) {
    for (int y = 0; y < seg.height; ++y) {
      if (seg.is_road(x, y)) {
        sum += y;
        ++columns;
        break;
      }
    }
  }
  if (columns == 0) {
    return seg.height / 2;
  }
  return static_cast<int>(std::lround(sum / columns));
}

BinaryMask instance_mask(const SegMap& seg, const BBox& box) {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
  BinaryMask mask = clipped_box_mask(seg.width, seg.height, box, &x0, &y0, &x1, &y1);
  bool any_dynamic = false;
  for (int y = y0; y < y1 && !any_dynamic; ++y) {
    for (int x = x0; x < x1; ++x) {
      if (seg.roles.is_dynamic(seg.at(x, y))) {
        any_dynamic = true;
        break;
      }
    }
  }
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const std::uint8_t id = seg.at(x, y);
      const bool take = any_dynamic ? seg.roles.is_dynamic(id)
                                    : !seg.roles.is_road(id) && !seg.roles.is_sky(id);
      if (take) {
        mask.set(x, y, true);
      }
    }
  }
  return mask;
}

BinaryMask shadow_mask(const SegMap& seg, const DepthMap& depth, const BBox& box,
                       const SunPose& sun, int horizon_row) {
  const BinaryMask inst = instance_mask(seg, box);
  if (inst.count() == 0) {
    throw Error(errc::kDegenerate, "object box contains no instance pixels");
  }
  const std::array<Point2, 4> src = {
      Point2{box.x1, box.y1}, Point2{box.x2, box.y1}, Point2{box.x2, box.y2},
      Point2{box.x1, box.y2}};
  std::array<Point2, 4> dst;
  for (std::size_t i = 0; i < 4; ++i) {
    dst[i] = project_ground_point(src[i], box, depth, sun, horizon_row);
  }
  return warp_mask(inst, fit_homography(src, dst), seg.width, seg.height);
}

BinaryMask puddle_mask(const DepthMap& depth, const SegMap& seg, const PuddleParams& p,
                       const RandomStream& stream) {
  require_road_role(seg);
  const PerlinNoise noise(stream.fork("puddles"));
  BinaryMask mask(seg.width, seg.height);
  const double cx = seg.width / 2.0;
  for (int y = 0; y < seg.height; ++y) {
    for (int x = 0; x < seg.width; ++x) {
      if (!seg.is_road(x, y)) {
        continue;
      }
      if (p.threshold <= -1.0) {
        mask.set(x, y, true);
        continue;
      }
      // Far ground is compressed in the image, so the noise is sampled at
      // proportionally larger ground coordinates there.
      const double d = depth.at(x, y);
      const double u = (x - cx) * (1.0 + 3.0 * d) + cx;
      const double v = y + 3.0 * seg.height * d;
      if (noise.sample(u, v, p.noise_frequency, 3) > p.threshold) {
        mask.set(x, y, true);
      }
    }
  }
  return mask;
}

// ---------------------------------------------------------------------------

ImageRgb overcast(const ImageRgb& img, const SegMap& seg, double amount, const Rgb& sky_gray,
                  double sky_weight) {
  check_seg(img, seg);
  require_sky_role(seg);
  ImageF f = to_float(img);
  apply_overcast(f, seg, amount, sky_gray, sky_weight);
  return to_u8(f);
}

ImageRgb dense_fog(const ImageRgb& img, const DepthMap& depth, const SegMap& seg,
                   const FogParams& p) {
  check_seg(img, seg);
  check_depth(img, depth);
  ImageF f = to_float(img);
  apply_shared_overcast(f, seg, p.overcast_amount);
  apply_fog(f, depth, p);
  return to_u8(f);
}

ImageRgb shadow_sunglare(const ImageRgb& img, const DepthMap& depth, const SegMap& seg,
                         std::span<const BBox> boxes, const SunParams& p, RandomStream stream,
                         AugmentStats* stats) {
  check_seg(img, seg);
  check_depth(img, depth);
  require_sky_role(seg);
  const int w = img.width();
  const int h = img.height();
  RandomStream sun_stream = stream.fork("sun");
  const SunPose sun = place_sun(seg, p.elevation, sun_stream);
  if (stats != nullptr) {
    stats->sun = sun;
  }

  ImageF f = to_float(img);
  if (p.saturation_boost > 0.0) {
    const auto k = static_cast<float>(1.0 + p.saturation_boost);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        float* px = f.at(x, y);
        const float l = luma(px);
        for (int c = 0; c < 3; ++c) {
          px[c] = std::clamp(l + k * (px[c] - l), 0.0f, 1.0f);
        }
      }
    }
  }

  if (p.shadow_strength > 0.0 && !boxes.empty()) {
    const int horizon = estimate_horizon_row(seg);
    std::vector<float> shade(img.pixel_count(), 0.0f);
    for (const BBox& box : boxes) {
      BinaryMask warped;
      try {
        warped = shadow_mask(seg, depth, box, sun, horizon);
      } catch (const Error& e) {
        if (std::string_view(e.kind()) != errc::kDegenerate) {
          throw;
        }
        spdlog::debug("shadow skipped for {} box [{}, {}, {}, {}]: {}", box.category, box.x1,
                      box.y1, box.x2, box.y2, e.what());
        if (stats != nullptr) {
          ++stats->shadows_skipped;
        }
        continue;
      }
      std::vector<float> plane(warped.bits.begin(), warped.bits.end());
      const std::vector<float> soft = gaussian_blur_plane(plane, w, h, 1.0);
      for (std::size_t i = 0; i < shade.size(); ++i) {
        shade[i] = std::max(shade[i], soft[i]);
      }
      if (stats != nullptr) {
        ++stats->shadows_cast;
      }

      // Directional shading across the object, darkest on the side facing
      // away from the sun.
      const BinaryMask inst = instance_mask(seg, box);
      const double bw = std::max(box.width(), 1.0);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (inst.at(x, y) == 0) {
            continue;
          }
          const double s = std::clamp(
              sun.azimuth >= 0.0 ? (box.x2 - x) / bw : (x - box.x1) / bw, 0.0, 1.0);
          const auto k = static_cast<float>(1.0 - kSideShading * p.shadow_strength * s);
          float* px = f.at(x, y);
          for (int c = 0; c < 3; ++c) {
            px[c] *= k;
          }
        }
      }
    }
    const auto strength = static_cast<float>(p.shadow_strength);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const float m = shade[static_cast<std::size_t>(y) * w + x];
        if (m <= 0.0f || !seg.is_road(x, y)) {
          continue;
        }
        float* px = f.at(x, y);
        for (int c = 0; c < 3; ++c) {
          px[c] *= 1.0f - strength * m;
        }
      }
    }
  }

  if (p.glare_gain > 0.0 && p.glare_sigma > 0.0) {
    const double inv = 1.0 / (2.0 * p.glare_sigma * p.glare_sigma);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double dx = x - sun.image_xy.x;
        const double dy = y - sun.image_xy.y;
        const double g = p.glare_gain * std::exp(-(dx * dx + dy * dy) * inv);
        float* px = f.at(x, y);
        for (int c = 0; c < 3; ++c) {
          const auto gc = static_cast<float>(g * kGlareTint[static_cast<std::size_t>(c)]);
          px[c] = 1.0f - (1.0f - px[c]) * (1.0f - gc);
        }
      }
    }
  }
  return to_u8(f);
}

ImageRgb rain_streaks(const ImageRgb& img, const SegMap& seg, const RainStreakParams& p,
                      double overcast_amount, RandomStream stream, AugmentStats* stats) {
  check_seg(img, seg);
  ImageF f = to_float(img);
  apply_shared_overcast(f, seg, overcast_amount);
  RandomStream s = stream.fork("streaks");
  draw_streaks(f, p, s, stats);
  return to_u8(f);
}

ImageRgb wet_street_lens_droplets(const ImageRgb& img, const DepthMap& depth, const SegMap& seg,
                                  const ReflectionParams& p, double overcast_amount,
                                  RandomStream stream, AugmentStats* stats) {
  check_seg(img, seg);
  check_depth(img, depth);
  require_road_role(seg);
  ImageF f = to_float(img);
  apply_shared_overcast(f, seg, overcast_amount);
  apply_reflection(f, seg, &depth, nullptr, p.reflectivity, p.roughness_blur, 0.0f, stats);
  RandomStream s = stream.fork("droplets");
  draw_droplets(f, p.droplet_count, p.droplet_radius_px, p.droplet_alpha, s, stats);
  return to_u8(f);
}

ImageRgb puddles(const ImageRgb& img, const DepthMap& depth, const SegMap& seg,
                 const PuddleParams& p, double overcast_amount, RandomStream stream,
                 AugmentStats* stats) {
  check_seg(img, seg);
  check_depth(img, depth);
  require_road_role(seg);
  ImageF f = to_float(img);
  apply_shared_overcast(f, seg, overcast_amount);
  const BinaryMask mask = puddle_mask(depth, seg, p, stream);
  const std::size_t area = mask.count();
  if (stats != nullptr) {
    stats->puddle_pixels += area;
  }
  if (area > 0) {
    apply_reflection(f, seg, &depth, &mask, p.reflectivity, kPuddleRoughness, kPuddleDarkening,
                     stats);
  }
  return to_u8(f);
}

ImageRgb rain_composition(const ImageRgb& img, const DepthMap& depth, const SegMap& seg,
                          std::span<const BBox> /*boxes*/, const RainCompositionParams& p,
                          RandomStream stream, AugmentStats* stats) {
  check_seg(img, seg);
  check_depth(img, depth);
  ImageF f = to_float(img);
  apply_shared_overcast(f, seg, p.overcast_amount);
  if (p.reflection.reflectivity > 0.0) {
    require_road_role(seg);
    apply_reflection(f, seg, &depth, nullptr, p.reflection.reflectivity,
                     p.reflection.roughness_blur, 0.0f, stats);
  }
  if (p.fog.beta > 0.0) {
    apply_fog(f, depth, p.fog);
  }
  RandomStream streaks = stream.fork("streaks");
  draw_streaks(f, p.streaks, streaks, stats);
  RandomStream droplets = stream.fork("droplets");
  draw_droplets(f, p.reflection.droplet_count, p.reflection.droplet_radius_px,
                p.reflection.droplet_alpha, droplets, stats);
  return to_u8(f);
}

ImageRgb rain_composition(const ImageRgb& img, const DepthMap& depth, const SegMap& seg,
                          std::span<const BBox> boxes, int level, RandomStream stream,
                          AugmentStats* stats) {
  const auto p = RainCompositionParams::from(resolve_intensity(Family::kRainComposition, level));
  return rain_composition(img, depth, seg, boxes, p, std::move(stream), stats);
}

// ---------------------------------------------------------------------------

bool family_needs_depth(Family f) noexcept {
  return f != Family::kOvercast && f != Family::kRainStreaks;
}

ImageRgb augment(const AugSpec& spec, const Scene& scene, std::string_view image_id,
                 AugmentStats* stats) {
  if (scene.image == nullptr || scene.seg == nullptr) {
    throw Error(errc::kInvalidArgument, "scene needs an image and a segmentation map");
  }
  if (family_needs_depth(spec.family) && scene.depth == nullptr) {
    throw Error(errc::kMissingDepth,
                fmt::format("{} needs a depth map for {}", family_name(spec.family), image_id));
  }
  validate_params(spec.family, spec.params);
  RandomStream stream(spec.seed, fmt::format("{}/{}", image_id, family_name(spec.family)));
  const ImageRgb& img = *scene.image;
  const SegMap& seg = *scene.seg;
  const ParamSet& ps = spec.params;
  switch (spec.family) {
    case Family::kOvercast: {
      const auto p = OvercastParams::from(ps);
      return overcast(img, seg, p.amount, p.sky_gray, p.sky_weight);
    }
    case Family::kDenseFog:
      return dense_fog(img, *scene.depth, seg, FogParams::from(ps));
    case Family::kShadowSunglare:
      return shadow_sunglare(img, *scene.depth, seg, scene.boxes, SunParams::from(ps), stream,
                             stats);
    case Family::kRainStreaks:
      return rain_streaks(img, seg, RainStreakParams::from(ps), overcast_amount_of(ps), stream,
                          stats);
    case Family::kWetStreetLensDroplets:
      return wet_street_lens_droplets(img, *scene.depth, seg, ReflectionParams::from(ps),
                                      overcast_amount_of(ps), stream, stats);
    case Family::kPuddles:
      return puddles(img, *scene.depth, seg, PuddleParams::from(ps), overcast_amount_of(ps),
                     stream, stats);
    case Family::kRainComposition:
      return rain_composition(img, *scene.depth, seg, scene.boxes,
                              RainCompositionParams::from(ps), stream, stats);
  }
  throw Error(errc::kUnknownFamily, "unhandled family");
}

}  // namespace wxforge
