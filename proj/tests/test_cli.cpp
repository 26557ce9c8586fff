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

#include <cstdlib>
#include <sstream>

#include "support.hpp"
#include "wxforge/cli.hpp"
#include "wxforge/embeddings.hpp"
#include "wxforge/service.hpp"
#include "wxforge/table.hpp"

using namespace wxforge;
using namespace wxforge::testing;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path source_path(const std::string& rel) { return fs::path(WXFORGE_SOURCE_DIR) / rel; }

/// Ingests a 4-image dataset under `dir` and returns the sources path.
std::string ingest_dataset(const TempDir& dir) {
  make_dataset(dir.path(), 4);
  const Result r = cli({"ingest", "--attributes", (dir / "attributes.json").string(), "--images",
                        (dir / "images").string(), "--seg", (dir / "seg").string(), "--depth",
                        (dir / "depth").string(), "--out", (dir / "sources.json").string()});
  REQUIRE(r.code == 0);
  return (dir / "sources.json").string();
}

EmbeddingSet gaussian_set(int n, int dim, double shift, unsigned seed, const std::string& tag) {
  std::mt19937 rng(seed);
  std::normal_distribution<float> g;
  EmbeddingSet s;
  s.n = static_cast<std::size_t>(n);
  s.dim = static_cast<std::size_t>(dim);
  s.space_tag = tag;
  for (int i = 0; i < n * dim; ++i) s.data.push_back(g(rng) + static_cast<float>(shift));
  for (int i = 0; i < n; ++i) s.ids.push_back("i" + std::to_string(i));
  return s;
}

}  // namespace

TEST_CASE("help output matches the snapshots") {
  const std::vector<std::string> commands = {"ingest",      "augment",   "embed",  "metrics",
                                             "contrastive", "correlate", "report", "serve"};
  const bool update = std::getenv("WXFORGE_UPDATE_SNAPSHOTS") != nullptr;
  auto check = [&](const std::vector<std::string>& args, const std::string& name) {
    const Result r = cli(args);
    CHECK(r.code == 0);
    const fs::path snap = fs::path(WXFORGE_TEST_DIR) / "snapshots" / (name + ".txt");
    if (update) write_text(snap, r.out);
    CAPTURE(name);
    CHECK(r.out == read_text(snap));
  };
  check({"--help"}, "help_main");
  for (const auto& c : commands) check({c, "--help"}, "help_" + c);
}

TEST_CASE("exit codes and error lines") {
  CHECK(cli({}).code == 2);
  const Result bad_flag = cli({"augment", "--bogus"});
  CHECK(bad_flag.code == 2);
  CHECK(bad_flag.err.starts_with("error:usage-error:"));
  CHECK(cli({"--workers", "0", "--print-config"}).code == 2);

  TempDir dir;
  const Result missing = cli({"correlate", "--table", (dir / "none.csv").string(), "--x", "a",
                              "--y", "b"});
  CHECK(missing.code == 1);
  CHECK(missing.err.starts_with("error:io-error:"));

  const std::string sources = ingest_dataset(dir);
  const Result unknown = cli({"augment", "--sources", sources, "--family", "hail", "--level", "1",
                              "--out", (dir / "o").string()});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.starts_with("error:unknown-family:"));
  const Result level = cli({"augment", "--sources", sources, "--family", "puddles", "--level",
                            "9", "--out", (dir / "o").string()});
  CHECK(level.err.starts_with("error:level-out-of-range:"));
  CHECK(cli({"augment", "--sources", sources, "--family", "puddles", "--out",
             (dir / "o").string()})
            .code == 2);
}

TEST_CASE("configuration precedence") {
  TempDir dir;
  write_text(dir / "cfg.toml", "workers = 3\nseed = 11\n[cmmd]\nsigma = 4.5\n");
  const std::string cfg = (dir / "cfg.toml").string();

  std::string text = cli({"--config", cfg, "--print-config"}).out;
  CHECK(text.find("workers = 3") != std::string::npos);
  CHECK(text.find("sigma = 4.5") != std::string::npos);

  text = cli({"--config", cfg, "--set", "workers=5", "--set", "cmmd.sigma=2", "--print-config"})
             .out;
  CHECK(text.find("workers = 5") != std::string::npos);
  CHECK(text.find("sigma = 2") != std::string::npos);
  CHECK(text.find("seed = 11") != std::string::npos);

  text = cli({"--config", cfg, "--set", "workers=5", "--workers", "7", "--print-config"}).out;
  CHECK(text.find("workers = 7") != std::string::npos);

  ::setenv("WXFORGE_CONFIG", cfg.c_str(), 1);
  CHECK(cli({"--print-config"}).out.find("workers = 3") != std::string::npos);
  ::unsetenv("WXFORGE_CONFIG");
  CHECK(cli({"--print-config"}).out.find("workers = 1") != std::string::npos);

  // The printed configuration is itself a valid config file.
  write_text(dir / "echo.toml", cli({"--config", cfg, "--print-config"}).out);
  CHECK(cli({"--config", (dir / "echo.toml").string(), "--print-config"}).out ==
        cli({"--config", cfg, "--print-config"}).out);

  CHECK(cli({"--set", "nope=1", "--print-config"}).code == 1);
  CHECK(cli({"--set", "workers=many", "--print-config"}).code == 1);
}

TEST_CASE("ingest then augment is worker independent") {
  TempDir dir;
  const std::string sources = ingest_dataset(dir);
  for (const char* family : {"rain_composition", "shadow_sunglare"}) {
    const Result one = cli({"--workers", "1", "augment", "--sources", sources, "--family", family,
                            "--level", "3", "--seed", "9", "--out", (dir / "w1").string()});
    const Result eight = cli({"--workers", "8", "augment", "--sources", sources, "--family",
                              family, "--level", "3", "--seed", "9", "--out",
                              (dir / "w8").string()});
    REQUIRE(one.code == 0);
    REQUIRE(eight.code == 0);
    const std::string subset = std::string(family) + "_3";
    const AugManifest m = read_manifest(dir / "w1" / subset / "manifest.json");
    CHECK(m.entries.size() == 4);
    for (const auto& e : m.entries) {
      const std::string a = read_text(e.output);
      CHECK_FALSE(a.empty());
      CHECK(a == read_text(dir / "w8" / subset / (e.image_id + ".png")));
    }
  }
}

TEST_CASE("a preset saved by the service drives a batch run") {
  TempDir dir;
  const std::string sources = ingest_dataset(dir);
  write_text(dir / "tables.toml", IntensityTables::builtin().to_toml());

  ServiceOptions o;
  o.sources = sources;
  o.tables = dir / "tables.toml";
  PreviewService svc(o);
  nlohmann::json params = params_to_json(resolve_intensity(Family::kDenseFog, 3));
  params["beta"] = 0.021;
  const nlohmann::json req = {{"name", "fog_misty"}, {"family", "dense_fog"}, {"params", params}};
  REQUIRE(svc.save_preset(req.dump()).status == 201);

  const Result r = cli({"--tables", (dir / "tables.toml").string(), "augment", "--sources",
                        sources, "--preset", "custom/fog_misty", "--seed", "4", "--out",
                        (dir / "out").string()});
  REQUIRE(r.code == 0);
  const AugManifest m = read_manifest(dir / "out/dense_fog_custom_fog_misty/manifest.json");
  CHECK(m.params == params_from_json(Family::kDenseFog, params));
  CHECK(m.level == 0);
  REQUIRE(m.preset.has_value());

  // The preview of the same image and seed shows exactly what the batch wrote.
  const auto& e = m.entries[0];
  const nlohmann::json preview = {
      {"image_id", e.image_id}, {"family", "dense_fog"}, {"params", params}, {"seed", e.seed}};
  CHECK(svc.preview(preview.dump()).body == read_text(e.output));

  CHECK(cli({"augment", "--sources", sources, "--preset", "custom/fog_misty", "--out",
             (dir / "x").string()})
            .err.starts_with("error:unknown-preset:"));
}

TEST_CASE("embed, metrics and contrastive through the command line") {
  TempDir dir;
  const std::string sources = ingest_dataset(dir);
  const EmbeddingSet fixture = gaussian_set(4, 3, 0.0, 1, "stub");
  write_embeddings(fixture, dir / "fixture.wxe");
  const std::string stub =
      "test -s {input_list} && cp " + shell_quote((dir / "fixture.wxe").string()) + " {output}";
  const Result e = cli({"embed", "--sources", sources, "--command", stub, "--out",
                        (dir / "src.wxe").string()});
  INFO(e.err);
  REQUIRE(e.code == 0);
  CHECK(read_embeddings(dir / "src.wxe") == fixture);

  write_embeddings(gaussian_set(30, 3, 0.0, 2, "stub"), dir / "a.wxe");
  write_embeddings(gaussian_set(30, 3, 1.0, 3, "stub"), dir / "b.wxe");
  write_embeddings(gaussian_set(30, 3, 3.0, 4, "stub"), dir / "c.wxe");
  const std::string a = (dir / "a.wxe").string();
  const std::string b = (dir / "b.wxe").string();
  const std::string c = (dir / "c.wxe").string();
  const Result m = cli({"metrics", "--row", "s=" + a + "," + a, "--trigger", "fog=" + b + "," + b,
                        "--trigger", "rain=" + c + "," + c, "--out",
                        (dir / "d.csv").string(), "--json", (dir / "d.json").string()});
  REQUIRE(m.code == 0);
  const DataTable d = DataTable::read_csv(dir / "d.csv");
  CHECK(d.columns == std::vector<std::string>{"fog_fid", "rain_fid", "fog_cmmd", "rain_cmmd"});
  CHECK(d.values[0][0] < d.values[0][1]);
  CHECK(nlohmann::json::parse(read_text(dir / "d.json"))["space_tags"]["fid"] == "stub");

  const Result con = cli({"contrastive", "--distances", (dir / "d.csv").string(), "--target",
                          "fog", "--precision", "6"});
  REQUIRE(con.code == 0);
  const DataTable with = DataTable::read_csv(dir / "d.csv");
  const double expected = d.values[0][1] / d.values[0][0] - 1.0;
  CHECK(with.column("c_fid_fog")[0] == doctest::Approx(expected).epsilon(1e-5));
}

TEST_CASE("contrastive scores of the ACDC distance fixture") {
  TempDir dir;
  const Result r = cli({"contrastive", "--distances",
                        source_path("data/fixtures/acdc_distances.csv").string(), "--target",
                        "fog", "--out", (dir / "c.csv").string()});
  REQUIRE(r.code == 0);
  const DataTable t = DataTable::read_csv(dir / "c.csv");
  const auto row = t.row_index("dense_fog_5");
  REQUIRE(row.has_value());
  CHECK(std::abs(t.values[*row][*t.column_index("c_fid_fog")] - 0.27) <= 0.01);
  CHECK(std::abs(t.values[*row][*t.column_index("c_cmmd_fog")] - 0.79) <= 0.01);
}

TEST_CASE("correlate and report on the results fixture") {
  const std::string table = source_path("data/fixtures/abdd_results.csv").string();
  const Result r = cli({"correlate", "--table", table, "--x", "c_cmmd.fog", "--y", "cls.fog"});
  CHECK(r.code == 0);
  CHECK(r.out == "r=0.9602 p=7.38e-20 n=35\n");

  TempDir dir;
  const Result rep = cli({"report", "--table", table, "--metric", "fid", "--json",
                          (dir / "r.json").string()});
  CHECK(rep.code == 0);
  CHECK(rep.out.find("a-bdd,49.75,129.67,47.25,62.02") != std::string::npos);
  CHECK(fs::exists(dir / "r.json"));

  const Result grouped = cli({"report", "--table", table, "--metric", "cmmd", "--group",
                              "fog=fog", "--group", "other=."});
  CHECK(grouped.code == 0);
  CHECK(grouped.out.find("\nfog,") != std::string::npos);
}
