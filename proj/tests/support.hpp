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

// Synthetic scenes and scratch directories shared by the test binaries.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "wxforge/image_io.hpp"
#include "wxforge/imagecore.hpp"
#include "wxforge/manifest.hpp"
#include "wxforge/pipeline.hpp"

namespace wxforge::testing {

inline constexpr std::uint8_t kRoad = 0;
inline constexpr std::uint8_t kBuilding = 2;
inline constexpr std::uint8_t kSky = 10;
inline constexpr std::uint8_t kCar = 13;

/// The 64×64 test scene: sky rows 0–19, a building band in rows 20–31,
/// road rows 32–63, and a 10×20 car whose box spans rows 26–46. Depth
/// falls linearly from 1 at the top row to 0 at the bottom row. Colors
/// vary with x so blur and saturation changes are visible.
inline LoadedScene make_scene(int w = 64, int h = 64, std::string id = "scene") {
  LoadedScene s;
  s.image_id = std::move(id);
  s.image = ImageRgb(w, h);
  s.seg.width = w;
  s.seg.height = h;
  s.seg.class_ids.assign(static_cast<std::size_t>(w) * h, kRoad);
  DepthMap d;
  d.width = w;
  d.height = h;
  d.depth.resize(static_cast<std::size_t>(w) * h);
  const int sky_end = h * 20 / 64;
  const int road_begin = h / 2;
  const BBox car{w * 27.0 / 64, h * 26.0 / 64, w * 37.0 / 64, h * 46.0 / 64, "car"};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto i = static_cast<std::size_t>(y) * w + x;
      std::uint8_t* px = s.image.at(x, y);
      const int ripple = (x * 7 + y * 3) % 17;
      std::uint8_t cls = kRoad;
      if (y < sky_end) {
        cls = kSky;
        px[0] = static_cast<std::uint8_t>(120 + ripple);
        px[1] = static_cast<std::uint8_t>(190 + ripple / 2);
        px[2] = 235;
      } else if (y < road_begin) {
        cls = kBuilding;
        px[0] = static_cast<std::uint8_t>(140 + 3 * ripple);
        px[1] = static_cast<std::uint8_t>(100 + ripple);
        px[2] = 80;
      } else {
        px[0] = static_cast<std::uint8_t>(80 + ripple);
        px[1] = static_cast<std::uint8_t>(85 + ripple);
        px[2] = static_cast<std::uint8_t>(95 + ripple);
      }
      if (x >= static_cast<int>(std::ceil(car.x1)) && x < static_cast<int>(std::ceil(car.x2)) &&
          y >= static_cast<int>(std::ceil(car.y1)) && y < static_cast<int>(std::ceil(car.y2))) {
        cls = kCar;
        px[0] = 200;
        px[1] = static_cast<std::uint8_t>(30 + ripple);
        px[2] = 40;
      }
      s.seg.class_ids[i] = cls;
      d.depth[i] = h > 1 ? 1.0f - static_cast<float>(y) / static_cast<float>(h - 1) : 0.0f;
    }
  }
  s.depth = std::move(d);
  s.boxes = {car};
  return s;
}

/// Unique directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("wxforge-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Writes the scene as a BDD-style dataset under `root`: images/<id>.png,
/// seg/<id>_train_id.png, depth/<id>.png (16-bit inverse depth).
inline void write_scene_files(const std::filesystem::path& root, const LoadedScene& s) {
  std::filesystem::create_directories(root / "images");
  std::filesystem::create_directories(root / "seg");
  std::filesystem::create_directories(root / "depth");
  save_png(s.image, root / "images" / (s.image_id + ".png"));
  GrayRaster seg{s.seg.width, s.seg.height, 8, {}};
  seg.values.assign(s.seg.class_ids.begin(), s.seg.class_ids.end());
  save_gray_png(seg, root / "seg" / (s.image_id + "_train_id.png"));
  GrayRaster depth{s.depth->width, s.depth->height, 16, {}};
  for (float d : s.depth->depth) {
    depth.values.push_back(static_cast<std::uint16_t>(std::lround((1.0 - d) * 65535.0)));
  }
  save_gray_png(depth, root / "depth" / (s.image_id + ".png"));
}

/// BDD attribute entry for a scene.
inline nlohmann::json bdd_entry(const LoadedScene& s, const std::string& weather = "clear",
                                const std::string& timeofday = "daytime") {
  nlohmann::json labels = nlohmann::json::array();
  for (const auto& b : s.boxes) {
    labels.push_back({{"category", b.category},
                      {"box2d", {{"x1", b.x1}, {"y1", b.y1}, {"x2", b.x2}, {"y2", b.y2}}}});
  }
  return {{"name", s.image_id + ".png"},
          {"attributes", {{"weather", weather}, {"timeofday", timeofday}}},
          {"labels", labels}};
}

/// A dataset of `n` scenes (ids img000, img001, ...) with an attribute file
/// at root/attributes.json; returns the ingested records.
inline std::vector<SourceRecord> make_dataset(const std::filesystem::path& root, int n) {
  nlohmann::json attrs = nlohmann::json::array();
  for (int i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "img%03d", i);
    LoadedScene s = make_scene(64, 64, id);
    // Shift colors per image so the images differ.
    for (auto& v : s.image.pixels()) {
      v = static_cast<std::uint8_t>(std::min(255, v + 3 * i));
    }
    write_scene_files(root, s);
    attrs.push_back(bdd_entry(s));
  }
  write_text(root / "attributes.json", attrs.dump(1));
  IngestOptions o;
  o.attributes_file = root / "attributes.json";
  o.image_dir = root / "images";
  o.seg_dir = root / "seg";
  o.depth_dir = root / "depth";
  return ingest(o).records;
}

inline double mean_abs_diff(const ImageRgb& a, const ImageRgb& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.pixels().size(); ++i) {
    sum += std::abs(static_cast<int>(a.pixels()[i]) - static_cast<int>(b.pixels()[i]));
  }
  return sum / static_cast<double>(a.pixels().size());
}

}  // namespace wxforge::testing
