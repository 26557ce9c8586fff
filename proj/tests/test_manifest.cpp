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

#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "support.hpp"
#include "wxforge/manifest.hpp"
#include "wxforge/pipeline.hpp"

using namespace wxforge;
using namespace wxforge::testing;
namespace fs = std::filesystem;

namespace {

template <class F>
std::string error_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return "";
}

SourceRecord record(std::string id, std::string weather, std::string tod) {
  SourceRecord r;
  r.image_id = std::move(id);
  r.weather = std::move(weather);
  r.timeofday = std::move(tod);
  return r;
}

IngestOptions options_for(const fs::path& root) {
  IngestOptions o;
  o.attributes_file = root / "attributes.json";
  o.image_dir = root / "images";
  o.seg_dir = root / "seg";
  o.depth_dir = root / "depth";
  return o;
}

}  // namespace

TEST_CASE("ingest intersects attributes with segmentation labels") {
  TempDir dir;
  nlohmann::json attrs = nlohmann::json::array();
  for (const char* id : {"c", "a", "b"}) {
    LoadedScene s = make_scene(16, 16, id);
    write_scene_files(dir.path(), s);
    attrs.push_back(bdd_entry(s, std::string(id) == "a" ? "overcast" : "clear"));
  }
  fs::remove(dir / "seg/b_train_id.png");
  write_text(dir / "attributes.json", attrs.dump());

  const IngestResult r = ingest(options_for(dir.path()));
  REQUIRE(r.records.size() == 2);
  CHECK(r.dropped.at("no-seg") == 1);
  // Sorted by id regardless of file order.
  CHECK(r.records[0].image_id == "a");
  CHECK(r.records[1].image_id == "c");
  CHECK(r.records[0].weather == "overcast");
  CHECK(r.records[0].timeofday == "daytime");
  REQUIRE(r.records[0].boxes.size() == 1);
  CHECK(r.records[0].boxes[0].category == "car");
  REQUIRE(r.records[0].depth_path.has_value());
  CHECK(fs::exists(*r.records[0].depth_path));
}

TEST_CASE("ingest edge cases") {
  TempDir dir;
  write_text(dir / "attributes.json", "");
  CHECK(ingest(options_for(dir.path())).records.empty());
  write_text(dir / "attributes.json", "[]");
  CHECK(ingest(options_for(dir.path())).records.empty());

  write_text(dir / "attributes.json",
             R"([{"name": "x.jpg", "attributes": {}}, {"name": "x.jpg", "attributes": {}}])");
  try {
    ingest(options_for(dir.path()));
    FAIL("expected parse-error");
  } catch (const Error& e) {
    CHECK(e.kind() == errc::kParse);
    CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
  }
  write_text(dir / "attributes.json", "[{\"name\": ");
  CHECK(error_kind([&] { ingest(options_for(dir.path())); }) == errc::kParse);
}

TEST_CASE("exclusion lists keep rejected records with their reason") {
  TempDir dir;
  make_dataset(dir.path(), 3);
  write_text(dir / "qa.txt", "# visual QA\nimg001 windshield reflection\n");
  IngestOptions o = options_for(dir.path());
  o.exclusion_list = dir / "qa.txt";
  const auto recs = ingest(o).records;
  REQUIRE(recs.size() == 3);
  CHECK(recs[0].accepted);
  CHECK_FALSE(recs[1].accepted);
  CHECK(recs[1].reject_reason == "windshield reflection");
}

TEST_CASE("filter_candidates") {
  const std::vector<SourceRecord> recs = {record("a", "rainy", "daytime"),
                                          record("b", "clear", "night"),
                                          record("c", "overcast", "daytime"),
                                          record("d", "clear", "daytime")};
  const auto kept = default_candidates(recs);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].image_id == "c");
  CHECK(kept[1].image_id == "d");
  CHECK(default_candidates(kept) == kept);
  CHECK(filter_candidates(recs, {}, {"daytime"}).empty());
}

TEST_CASE("sources round trip") {
  TempDir dir;
  const auto recs = make_dataset(dir.path(), 2);
  write_sources(recs, dir / "sources.json");
  CHECK(read_sources(dir / "sources.json") == recs);
  CHECK(error_kind([&] { sources_from_json("{}"); }) == errc::kParse);
}

TEST_CASE("build_manifest") {
  TempDir dir;
  const auto recs = make_dataset(dir.path(), 3);
  const AugSpec spec = AugSpec::from_level(Family::kDenseFog, 3, 0);
  const AugManifest m = build_manifest(recs, spec, 1234, dir / "out");
  CHECK(m.subset_name == "dense_fog_3");
  REQUIRE(m.entries.size() == 3);
  for (const auto& e : m.entries) {
    CHECK(e.output == dir / "out" / "dense_fog_3" / (e.image_id + ".png"));
    CHECK(e.seed == entry_seed(1234, e.image_id));
    CHECK(fs::exists(e.seg_path));
    CHECK(fs::exists(e.boxes_path));
    const AugSpec back = m.spec_for(e);
    CHECK(back.family == Family::kDenseFog);
    CHECK(back.level == 3);
    CHECK(back.params == spec.params);
  }
  // Seeds are per image, so dropping one image keeps the others' seeds.
  const std::vector<SourceRecord> two(recs.begin() + 1, recs.end());
  const AugManifest m2 = build_manifest(two, spec, 1234, dir / "out");
  CHECK(m2.entries[0].seed == m.entries[1].seed);

  CHECK(error_kind([&] { build_manifest({}, spec, 1, dir / "out"); }) == errc::kEmptyInput);
  std::vector<SourceRecord> broken = recs;
  broken[0].seg_path = dir / "nope.png";
  CHECK(error_kind([&] { build_manifest(broken, spec, 1, dir / "out"); }) == errc::kMissingLabel);
}

TEST_CASE("manifests serialize deterministically") {
  TempDir dir;
  const auto recs = make_dataset(dir.path(), 3);
  const AugSpec spec = AugSpec::from_level(Family::kPuddles, 2, 0);
  const std::string a = manifest_to_json(build_manifest(recs, spec, 5, dir / "out"));
  std::vector<SourceRecord> shuffled(recs.rbegin(), recs.rend());
  std::sort(shuffled.begin(), shuffled.end(),
            [](const auto& x, const auto& y) { return x.image_id < y.image_id; });
  const std::string b = manifest_to_json(build_manifest(shuffled, spec, 5, dir / "out"));
  CHECK(a == b);
  CHECK(a.back() == '\n');

  write_manifest(build_manifest(recs, spec, 5, dir / "out"), dir / "m.json");
  const AugManifest back = read_manifest(dir / "m.json");
  CHECK(manifest_to_json(back) == a);
  CHECK(back.tool_version == kToolVersion);
  CHECK(back.table_version == IntensityTables::builtin().version());
}

TEST_CASE("manifest subset names must agree with family and level") {
  TempDir dir;
  const auto recs = make_dataset(dir.path(), 1);
  std::string text =
      manifest_to_json(build_manifest(recs, AugSpec::from_level(Family::kOvercast, 2, 0), 1, dir / "o"));
  const auto pos = text.find("\"overcast_2\"");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 12, "\"overcast_4\"");
  CHECK(error_kind([&] { manifest_from_json(text); }) == errc::kParse);
}

TEST_CASE("run_manifest writes every output and is worker independent") {
  TempDir dir;
  const auto recs = make_dataset(dir.path(), 4);
  const AugSpec spec = AugSpec::from_level(Family::kRainComposition, 4, 0);
  const AugManifest one = build_manifest(recs, spec, 77, dir / "w1");
  const AugManifest eight = build_manifest(recs, spec, 77, dir / "w8");
  const auto stats = run_manifest(one, recs, 1);
  run_manifest(eight, recs, 8);
  CHECK(stats.size() == 4);
  for (std::size_t i = 0; i < one.entries.size(); ++i) {
    const std::string a = read_text(one.entries[i].output);
    CHECK_FALSE(a.empty());
    CHECK(a == read_text(eight.entries[i].output));
    CHECK(load_image(one.entries[i].output).width() == 64);
  }
  CHECK(stats[0].streaks_drawn > 0);
}

TEST_CASE("load_scene checks its rasters") {
  TempDir dir;
  auto recs = make_dataset(dir.path(), 1);
  const LoadedScene s = load_scene(recs[0], true);
  CHECK(s.image.width() == 64);
  REQUIRE(s.depth.has_value());
  CHECK(s.depth->at(0, 0) == doctest::Approx(1.0));
  CHECK(s.depth->at(0, 63) == doctest::Approx(0.0));
  recs[0].depth_path.reset();
  CHECK(error_kind([&] { load_scene(recs[0], true); }) == errc::kMissingDepth);
  CHECK_NOTHROW(load_scene(recs[0], false));

  const LoadedScene small = downscale_scene(s, 16);
  CHECK(small.image.width() == 16);
  CHECK(small.seg.width == 16);
  CHECK(small.depth->width == 16);
  CHECK(small.boxes[0].x1 == doctest::Approx(s.boxes[0].x1 / 4));
}
