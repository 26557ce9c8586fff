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

#include "wxforge/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "wxforge/error.hpp"
#include "wxforge/image_io.hpp"
#include "wxforge/parallel.hpp"
#include "wxforge/table.hpp"

namespace wxforge {

namespace fs = std::filesystem;

namespace {

LoadedScene load_paths(std::string image_id, const fs::path& image, const fs::path& seg,
                       const std::optional<fs::path>& depth, std::vector<BBox> boxes,
                       bool need_depth) {
  LoadedScene s;
  s.image_id = std::move(image_id);
  s.image = load_image(image);
  s.seg = load_seg(seg);
  require_same_size(s.image.width(), s.image.height(), s.seg.width, s.seg.height,
                    "image and segmentation");
  if (need_depth) {
    if (!depth) {
      throw Error(errc::kMissingDepth, fmt::format("image '{}' has no depth map", s.image_id));
    }
    s.depth = load_depth(*depth);
    require_same_size(s.image.width(), s.image.height(), s.depth->width, s.depth->height,
                      "image and depth");
  }
  s.boxes = std::move(boxes);
  return s;
}

}  // namespace

Scene LoadedScene::view() const noexcept {
  return Scene{&image, depth ? &*depth : nullptr, &seg, boxes};
}

LoadedScene load_scene(const SourceRecord& record, bool need_depth) {
  return load_paths(record.image_id, record.image_path, record.seg_path, record.depth_path,
                    record.boxes, need_depth);
}

ImageRgb resize_area(const ImageRgb& img, int width, int height) {
  if (width <= 0 || height <= 0 || width > img.width() || height > img.height()) {
    throw Error(errc::kInvalidArgument,
                fmt::format("area resize from {}x{} to {}x{}", img.width(), img.height(), width,
                            height));
  }
  ImageRgb out(width, height);
  const double sx = static_cast<double>(img.width()) / width;
  const double sy = static_cast<double>(img.height()) / height;
  for (int y = 0; y < height; ++y) {
    const double y0 = y * sy;
    const double y1 = y0 + sy;
    for (int x = 0; x < width; ++x) {
      const double x0 = x * sx;
      const double x1 = x0 + sx;
      double acc[3] = {0, 0, 0};
      double wsum = 0.0;
      for (int yy = static_cast<int>(y0); yy < std::min(img.height(), static_cast<int>(std::ceil(y1)));
           ++yy) {
        const double wy = std::min<double>(yy + 1, y1) - std::max<double>(yy, y0);
        for (int xx = static_cast<int>(x0);
             xx < std::min(img.width(), static_cast<int>(std::ceil(x1))); ++xx) {
          const double w = wy * (std::min<double>(xx + 1, x1) - std::max<double>(xx, x0));
          const std::uint8_t* px = img.at(xx, yy);
          for (int c = 0; c < 3; ++c) {
            acc[c] += w * px[c];
          }
          wsum += w;
        }
      }
      std::uint8_t* o = out.at(x, y);
      for (int c = 0; c < 3; ++c) {
        o[c] = static_cast<std::uint8_t>(std::clamp(std::lround(acc[c] / wsum), 0L, 255L));
      }
    }
  }
  return out;
}

LoadedScene downscale_scene(const LoadedScene& scene, int max_edge) {
  const int w = scene.image.width();
  const int h = scene.image.height();
  if (std::max(w, h) <= max_edge) {
    return scene;
  }
  const double s = static_cast<double>(max_edge) / std::max(w, h);
  const int nw = std::max(1, static_cast<int>(std::lround(w * s)));
  const int nh = std::max(1, static_cast<int>(std::lround(h * s)));
  auto src_x = [&](int x) { return std::min(w - 1, static_cast<int>((x + 0.5) * w / nw)); };
  auto src_y = [&](int y) { return std::min(h - 1, static_cast<int>((y + 0.5) * h / nh)); };

  LoadedScene out;
  out.image_id = scene.image_id;
  out.image = resize_area(scene.image, nw, nh);
  out.seg.width = nw;
  out.seg.height = nh;
  out.seg.roles = scene.seg.roles;
  out.seg.class_ids.resize(static_cast<std::size_t>(nw) * static_cast<std::size_t>(nh));
  for (int y = 0; y < nh; ++y) {
    for (int x = 0; x < nw; ++x) {
      out.seg.class_ids[static_cast<std::size_t>(y) * nw + x] = scene.seg.at(src_x(x), src_y(y));
    }
  }
  if (scene.depth) {
    DepthMap d;
    d.width = nw;
    d.height = nh;
    d.max_range_m = scene.depth->max_range_m;
    d.depth.resize(out.seg.class_ids.size());
    for (int y = 0; y < nh; ++y) {
      for (int x = 0; x < nw; ++x) {
        d.depth[static_cast<std::size_t>(y) * nw + x] = scene.depth->at(src_x(x), src_y(y));
      }
    }
    out.depth = std::move(d);
  }
  const double kx = static_cast<double>(nw) / w;
  const double ky = static_cast<double>(nh) / h;
  for (BBox b : scene.boxes) {
    b.x1 *= kx;
    b.x2 *= kx;
    b.y1 *= ky;
    b.y2 *= ky;
    out.boxes.push_back(std::move(b));
  }
  return out;
}

std::vector<AugmentStats> run_manifest(const AugManifest& manifest,
                                       std::span<const SourceRecord> records, int workers) {
  std::map<std::string_view, const SourceRecord*> by_id;
  for (const auto& r : records) {
    by_id.emplace(r.image_id, &r);
  }
  const bool need_depth = family_needs_depth(manifest.family);
  std::vector<AugmentStats> stats(manifest.entries.size());
  parallel_for(manifest.entries.size(), workers, [&](std::size_t i) {
    const ManifestEntry& e = manifest.entries[i];
    const auto it = by_id.find(e.image_id);
    if (it == by_id.end()) {
      throw Error(errc::kMissingLabel, fmt::format("no source record for '{}'", e.image_id));
    }
    const LoadedScene scene = load_paths(e.image_id, e.source_image, e.seg_path, e.depth_path,
                                         it->second->boxes, need_depth);
    const ImageRgb out = augment(manifest.spec_for(e), scene.view(), e.image_id, &stats[i]);
    const auto bytes = encode_png(out);
    write_file_atomic(e.output,
                      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    spdlog::debug("wrote {}", e.output.string());
  });
  return stats;
}

}  // namespace wxforge
