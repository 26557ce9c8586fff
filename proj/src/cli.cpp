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

#include "wxforge/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "wxforge/analysis.hpp"
#include "wxforge/embeddings.hpp"
#include "wxforge/error.hpp"
#include "wxforge/manifest.hpp"
#include "wxforge/metrics.hpp"
#include "wxforge/params.hpp"
#include "wxforge/pipeline.hpp"
#include "wxforge/service.hpp"
#include "wxforge/table.hpp"

namespace wxforge {

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double expect_number(std::string_view key, const toml::Value& v) {
  if (const auto* d = std::get_if<double>(&v)) {
    return *d;
  }
  throw Error(errc::kInvalidArgument, fmt::format("setting '{}' expects a number", key));
}

std::string expect_string(std::string_view key, const toml::Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) {
    return *s;
  }
  throw Error(errc::kInvalidArgument, fmt::format("setting '{}' expects a string", key));
}

long long expect_integer(std::string_view key, const toml::Value& v, long long lo, double hi) {
  const double d = expect_number(key, v);
  if (d != std::floor(d) || d < static_cast<double>(lo) || d > hi) {
    throw Error(errc::kInvalidArgument,
                fmt::format("setting '{}' expects an integer in [{}, {}]", key, lo, hi));
  }
  return static_cast<long long>(d);
}

const std::set<std::string, std::less<>> kLogLevels{"trace", "debug", "info",
                                                    "warn",  "error", "off"};

void set_log_level(const std::string& level) {
  spdlog::set_level(spdlog::level::from_str(level));
}

MmdOptions mmd_options(const CliConfig& c) {
  MmdOptions o;
  o.sigma = c.cmmd_sigma;
  o.scale = c.cmmd_scale;
  o.estimator = c.cmmd_estimator == "biased" ? MmdEstimator::kBiased : MmdEstimator::kUnbiased;
  return o;
}

IntensityTables load_tables(const CliConfig& c) {
  return c.tables.empty() ? IntensityTables::builtin() : IntensityTables::load(c.tables);
}

SpaceTagRegistry load_registry(const CliConfig& c) {
  return c.space_tags.empty() ? SpaceTagRegistry::builtin() : SpaceTagRegistry::load(c.space_tags);
}

std::pair<std::string, std::string> split_assignment(std::string_view s, std::string_view what) {
  const auto eq = s.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw UsageError(fmt::format("{} '{}' is not NAME=VALUE", what, s));
  }
  return {std::string(s.substr(0, eq)), std::string(s.substr(eq + 1))};
}

// --------------------------------------------------------------------------
// Subcommand arguments, filled by CLI11.

struct IngestArgs {
  std::string attributes;
  std::string images;
  std::string seg;
  std::string depth;
  std::string exclude;
  std::vector<std::string> weather{"clear", "overcast"};
  std::vector<std::string> timeofday{"daytime"};
  bool all_conditions = false;
  std::string out;
};

struct AugmentArgs {
  std::string sources;
  std::string family;
  int level = 0;
  std::string preset;
  std::uint64_t seed = 0;
  std::string out;
};

struct EmbedArgs {
  std::string images;
  std::string manifest;
  std::string sources;
  std::string space = "fid";
  std::string command;
  std::string out;
};

struct MetricsArgs {
  std::vector<std::string> rows;
  std::vector<std::string> triggers;
  std::string metric = "both";
  std::string out;
  std::string json;
};

struct ContrastiveArgs {
  std::string distances;
  std::string target;
  std::string out;
  int precision = 2;
};

struct CorrelateArgs {
  std::string table;
  std::string x;
  std::string y;
  std::string exclude = kDefaultRowExclude;
  std::string json;
};

struct ReportArgs {
  std::string kind = "min-distance";
  std::string table;
  std::string metric = "fid";
  std::vector<std::string> groups;
  std::vector<std::string> embeddings;
  std::string out;
  std::string json;
};

struct ServeArgs {
  std::string sources;
};

// --------------------------------------------------------------------------

int cmd_ingest(const IngestArgs& a, std::ostream& out) {
  IngestOptions o;
  o.attributes_file = a.attributes;
  o.image_dir = a.images;
  o.seg_dir = a.seg;
  if (!a.depth.empty()) {
    o.depth_dir = a.depth;
  }
  if (!a.exclude.empty()) {
    o.exclusion_list = a.exclude;
  }
  IngestResult r = ingest(o);
  std::vector<SourceRecord> records =
      a.all_conditions
          ? r.records
          : filter_candidates(r.records, std::set<std::string>(a.weather.begin(), a.weather.end()),
                              std::set<std::string>(a.timeofday.begin(), a.timeofday.end()));
  write_sources(records, a.out);
  std::size_t accepted = 0;
  for (const auto& rec : records) {
    accepted += rec.accepted ? 1 : 0;
  }
  out << fmt::format("{} records ({} accepted) of {} ingested -> {}\n", records.size(), accepted,
                     r.records.size(), a.out);
  for (const auto& [reason, n] : r.dropped) {
    out << fmt::format("dropped {}: {}\n", reason, n);
  }
  return kExitOk;
}

int cmd_augment(const CliConfig& c, const AugmentArgs& a, bool seed_given, std::ostream& out) {
  const IntensityTables tables = load_tables(c);
  const std::uint64_t seed = seed_given ? a.seed : c.seed;
  AugSpec spec;
  if (!a.preset.empty()) {
    spec = AugSpec::from_preset(a.preset, seed, tables);
  } else {
    spec = AugSpec::from_level(parse_family(a.family), a.level, seed, tables);
  }
  const std::vector<SourceRecord> records = read_sources(a.sources);
  const AugManifest manifest = build_manifest(records, spec, seed, a.out, tables);
  const auto stats = run_manifest(manifest, records, c.workers);
  const fs::path manifest_path = fs::path(a.out) / manifest.subset_name / "manifest.json";
  write_manifest(manifest, manifest_path);
  out << fmt::format("{}: {} images -> {}\n", manifest.subset_name, stats.size(),
                     (fs::path(a.out) / manifest.subset_name).string());
  return kExitOk;
}

std::vector<std::string> read_image_list(const fs::path& path) {
  std::vector<std::string> paths;
  std::istringstream in(read_text_file(path));
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (!line.empty() && line.front() != '#') {
      paths.push_back(line);
    }
  }
  return paths;
}

int cmd_embed(const CliConfig& c, const EmbedArgs& a, std::ostream& out) {
  std::vector<std::string> paths;
  if (!a.images.empty()) {
    paths = read_image_list(a.images);
  } else if (!a.manifest.empty()) {
    for (const auto& e : read_manifest(a.manifest).entries) {
      paths.push_back(e.output.string());
    }
  } else {
    for (const auto& r : read_sources(a.sources)) {
      if (r.accepted) {
        paths.push_back(r.image_path.string());
      }
    }
  }
  if (paths.empty()) {
    throw Error(errc::kEmptyInput, "no images to embed");
  }
  std::string command = a.command;
  if (command.empty()) {
    command = a.space == "fid" ? c.extractor_fid : c.extractor_cmmd;
  }
  if (command.empty()) {
    throw Error(errc::kInvalidArgument,
                fmt::format("no extractor command: pass --command or set extractor.{}", a.space));
  }
  const EmbeddingSet set = run_extractor(command, paths, a.out, load_registry(c));
  out << fmt::format("{} x {} embeddings ({}) -> {}\n", set.n, set.dim, set.space_tag, a.out);
  return kExitOk;
}

int cmd_metrics(const CliConfig& c, const MetricsArgs& a, std::ostream& out) {
  const MetricKind which = a.metric == "fid"    ? MetricKind::kFid
                           : a.metric == "cmmd" ? MetricKind::kCmmd
                                                : MetricKind::kBoth;
  const SpaceTagRegistry registry = load_registry(c);
  std::map<std::string, std::unique_ptr<EmbeddingSet>> loaded;
  auto get = [&](const std::string& path) {
    auto& slot = loaded[path];
    if (!slot) {
      slot = std::make_unique<EmbeddingSet>(load_embeddings(path, registry));
    }
    return slot.get();
  };
  auto parse_sets = [&](const std::vector<std::string>& specs, std::string_view what) {
    std::vector<NamedSet> sets;
    for (const auto& s : specs) {
      auto [name, paths] = split_assignment(s, what);
      NamedSet ns{name, nullptr, nullptr};
      const auto comma = paths.find(',');
      if (which == MetricKind::kBoth) {
        if (comma == std::string::npos) {
          throw UsageError(fmt::format("{} '{}' needs FID,CMMD paths for --metric both", what, s));
        }
        ns.fid_space = get(paths.substr(0, comma));
        ns.cmmd_space = get(paths.substr(comma + 1));
      } else if (which == MetricKind::kFid) {
        ns.fid_space = get(paths);
      } else {
        ns.cmmd_space = get(paths);
      }
      sets.push_back(ns);
    }
    return sets;
  };
  const auto rows = parse_sets(a.rows, "--row");
  const auto triggers = parse_sets(a.triggers, "--trigger");
  const MmdOptions opts = mmd_options(c);
  const DistanceMatrix m = cross_matrix(rows, triggers, which, opts, c.workers);
  m.to_table().write_csv(a.out);
  if (!a.json.empty()) {
    write_file_atomic(a.json, m.to_json(opts));
  }
  out << fmt::format("{} x {} distances -> {}\n", m.rows.size(), m.cols.size(), a.out);
  return kExitOk;
}

int cmd_contrastive(const ContrastiveArgs& a, std::ostream& out) {
  DataTable table = DataTable::read_csv(a.distances);
  const DistanceMatrix m = DistanceMatrix::from_table(table);
  const auto cols = contrastive_columns(m, a.target);
  out << table.key_column;
  for (const auto& [name, values] : cols) {
    out << "," << name;
  }
  out << "\n";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out << table.rows[r];
    for (const auto& [name, values] : cols) {
      out << "," << fmt::format("{:.{}f}", values[r], a.precision);
    }
    out << "\n";
  }
  for (const auto& [name, values] : cols) {
    table.add_column(name, values);
  }
  table.write_csv(a.out.empty() ? a.distances : a.out);
  return kExitOk;
}

int cmd_correlate(const CorrelateArgs& a, std::ostream& out) {
  const DataTable table = DataTable::read_csv(a.table);
  const StudyReport rep = correlate_study(table, a.x, a.y, a.exclude);
  out << fmt::format("r={:.4f} p={:.3g} n={}\n", rep.result.r, rep.result.p, rep.result.n);
  if (!a.json.empty()) {
    write_file_atomic(a.json, rep.to_json());
  }
  return kExitOk;
}

int cmd_report(const CliConfig& c, const ReportArgs& a, std::ostream& out) {
  if (a.kind == "pca") {
    if (a.embeddings.size() == 0) {
      throw UsageError("report --kind pca needs at least one --embedding LABEL=PATH");
    }
    const SpaceTagRegistry registry = load_registry(c);
    std::vector<EmbeddingSet> sets;
    std::vector<std::string> labels;
    sets.reserve(a.embeddings.size());
    for (const auto& e : a.embeddings) {
      auto [label, path] = split_assignment(e, "--embedding");
      sets.push_back(load_embeddings(path, registry));
      labels.push_back(label);
    }
    std::vector<LabeledEmbeddings> input;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      input.push_back({labels[i], &sets[i]});
    }
    const ProjectedPoints p = pca_project(input);
    out << fmt::format("explained variance: {:.4f} {:.4f}\n", p.explained_variance[0],
                       p.explained_variance[1]);
    if (!a.out.empty()) {
      write_file_atomic(a.out, p.to_csv());
    }
    return kExitOk;
  }
  if (a.table.empty()) {
    throw UsageError("report --kind min-distance needs --table");
  }
  std::vector<std::pair<std::string, std::regex>> groups;
  for (const auto& g : a.groups) {
    auto [label, pattern] = split_assignment(g, "--group");
    try {
      groups.emplace_back(label, std::regex(pattern));
    } catch (const std::regex_error&) {
      throw Error(errc::kInvalidArgument, fmt::format("--group pattern '{}' is invalid", pattern));
    }
  }
  const Grouping grouping = [&groups](std::string_view name) {
    const std::string s(name);
    for (const auto& [label, re] : groups) {
      if (std::regex_search(s, re)) {
        return label;
      }
    }
    return default_dataset_label(name);
  };
  const MinDistanceReport rep =
      min_distance_report(DataTable::read_csv(a.table), a.metric, grouping);
  if (!a.out.empty()) {
    write_file_atomic(a.out, rep.to_csv());
  } else {
    out << rep.to_csv();
  }
  if (!a.json.empty()) {
    write_file_atomic(a.json, rep.to_json());
  }
  return kExitOk;
}

int cmd_serve(const CliConfig& c, const ServeArgs& a, std::ostream& out) {
  ServiceOptions o;
  if (!a.sources.empty()) {
    o.sources = a.sources;
  }
  if (!c.tables.empty()) {
    o.tables = c.tables;
  }
  PreviewService service(o);
  std::optional<fs::path> static_dir;
  if (!c.serve_static_dir.empty()) {
    static_dir = c.serve_static_dir;
  }
  HttpServer server(service, static_dir);
  const int port = server.bind(c.serve_host, c.serve_port);
  out << fmt::format("listening on http://{}:{}\n", c.serve_host, port) << std::flush;
  server.listen();
  return kExitOk;
}

void ensure_stderr_logger() {
  if (spdlog::get("wxforge") == nullptr) {
    auto logger = spdlog::stderr_color_mt("wxforge");
    spdlog::set_default_logger(logger);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

void apply_setting(CliConfig& c, std::string_view key, const toml::Value& v) {
  if (key == "workers") {
    c.workers = static_cast<int>(expect_integer(key, v, 1, 1024));
  } else if (key == "log_level") {
    c.log_level = expect_string(key, v);
    if (!kLogLevels.contains(c.log_level)) {
      throw Error(errc::kInvalidArgument, fmt::format("unknown log level '{}'", c.log_level));
    }
  } else if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(expect_integer(key, v, 0, 9007199254740992.0));
  } else if (key == "tables") {
    c.tables = expect_string(key, v);
  } else if (key == "space_tags") {
    c.space_tags = expect_string(key, v);
  } else if (key == "cmmd.sigma" || key == "cmmd.scale") {
    const double d = expect_number(key, v);
    if (!(d > 0.0)) {
      throw Error(errc::kInvalidArgument, fmt::format("setting '{}' must be positive", key));
    }
    (key == "cmmd.sigma" ? c.cmmd_sigma : c.cmmd_scale) = d;
  } else if (key == "cmmd.estimator") {
    c.cmmd_estimator = expect_string(key, v);
    if (c.cmmd_estimator != "unbiased" && c.cmmd_estimator != "biased") {
      throw Error(errc::kInvalidArgument, "cmmd.estimator must be 'unbiased' or 'biased'");
    }
  } else if (key == "extractor.fid") {
    c.extractor_fid = expect_string(key, v);
  } else if (key == "extractor.cmmd") {
    c.extractor_cmmd = expect_string(key, v);
  } else if (key == "serve.host") {
    c.serve_host = expect_string(key, v);
  } else if (key == "serve.port") {
    c.serve_port = static_cast<int>(expect_integer(key, v, 0, 65535));
  } else if (key == "serve.static_dir") {
    c.serve_static_dir = expect_string(key, v);
  } else {
    throw Error(errc::kInvalidArgument, fmt::format("unknown setting '{}'", key));
  }
}

void apply_config(CliConfig& c, const toml::Document& doc) {
  for (const auto& e : doc.root.entries) {
    apply_setting(c, e.key, e.value);
  }
  for (const auto& t : doc.tables) {
    for (const auto& e : t.entries) {
      apply_setting(c, t.name + "." + e.key, e.value);
    }
  }
}

void apply_override(CliConfig& c, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error(errc::kInvalidArgument,
                fmt::format("override '{}' is not key=value", assignment));
  }
  const std::string_view key = assignment.substr(0, eq);
  const std::string text(assignment.substr(eq + 1));
  toml::Value value = text;
  try {
    const toml::Document doc = toml::parse("v = " + text, "--set");
    value = doc.root.entries.at(0).value;
  } catch (const Error&) {
    // Not a TOML literal: keep the raw text as a string.
  }
  apply_setting(c, key, value);
}

std::string config_to_toml(const CliConfig& c) {
  toml::Table root{"", {}, 0};
  root.entries.push_back({"workers", static_cast<double>(c.workers), 0});
  root.entries.push_back({"log_level", c.log_level, 0});
  root.entries.push_back({"seed", static_cast<double>(c.seed), 0});
  root.entries.push_back({"tables", c.tables, 0});
  root.entries.push_back({"space_tags", c.space_tags, 0});
  toml::Table cmmd{"cmmd", {}, 0};
  cmmd.entries.push_back({"sigma", c.cmmd_sigma, 0});
  cmmd.entries.push_back({"scale", c.cmmd_scale, 0});
  cmmd.entries.push_back({"estimator", c.cmmd_estimator, 0});
  toml::Table extractor{"extractor", {}, 0};
  extractor.entries.push_back({"fid", c.extractor_fid, 0});
  extractor.entries.push_back({"cmmd", c.extractor_cmmd, 0});
  toml::Table serve{"serve", {}, 0};
  serve.entries.push_back({"host", c.serve_host, 0});
  serve.entries.push_back({"port", static_cast<double>(c.serve_port), 0});
  serve.entries.push_back({"static_dir", c.serve_static_dir, 0});
  return toml::format_table(root) + "\n" + toml::format_table(cmmd) + "\n" +
         toml::format_table(extractor) + "\n" + toml::format_table(serve);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  ensure_stderr_logger();

  CLI::App app{"Adverse-weather augmentation and image-set distance toolkit", "wxforge"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  bool print_config = false;
  std::string log_level;
  int workers = 0;
  std::string tables;
  app.add_option("--config", config_path, "Config file (default: $WXFORGE_CONFIG)");
  app.add_option("--set", overrides, "Override a setting, KEY=VALUE (repeatable)");
  app.add_flag("--print-config", print_config, "Print the resolved configuration and exit");
  auto* log_opt = app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")
                      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
  auto* workers_opt =
      app.add_option("--workers", workers, "Worker threads (>= 1)")->check(CLI::Range(1, 1024));
  auto* tables_opt = app.add_option("--tables", tables, "Intensity tables file");

  IngestArgs ingest_args;
  auto* ingest_cmd = app.add_subcommand("ingest", "Index annotated source images");
  ingest_cmd->add_option("--attributes", ingest_args.attributes, "Detection/attribute JSON file")
      ->required();
  ingest_cmd->add_option("--images", ingest_args.images, "Image directory")->required();
  ingest_cmd->add_option("--seg", ingest_args.seg, "Segmentation label directory")->required();
  ingest_cmd->add_option("--depth", ingest_args.depth, "Depth map directory");
  ingest_cmd->add_option("--exclude", ingest_args.exclude, "QA exclusion list");
  ingest_cmd->add_option("--weather", ingest_args.weather, "Accepted weather tags")
      ->capture_default_str();
  ingest_cmd->add_option("--timeofday", ingest_args.timeofday, "Accepted time-of-day tags")
      ->capture_default_str();
  ingest_cmd->add_flag("--all-conditions", ingest_args.all_conditions,
                       "Keep every weather and time of day");
  ingest_cmd->add_option("--out", ingest_args.out, "Sources JSON to write")->required();

  AugmentArgs aug_args;
  auto* aug_cmd = app.add_subcommand("augment", "Render one augmentation subset");
  aug_cmd->add_option("--manifest,--sources", aug_args.sources, "Sources JSON from ingest")
      ->required();
  auto* family_opt = aug_cmd->add_option("--family", aug_args.family, "Augmentation family");
  auto* level_opt = aug_cmd->add_option("--level", aug_args.level, "Intensity level 1-5");
  auto* preset_opt =
      aug_cmd->add_option("--preset", aug_args.preset, "Custom preset, e.g. custom/fog_misty");
  auto* seed_opt = aug_cmd->add_option("--seed", aug_args.seed, "Base seed (default: setting)");
  aug_cmd->add_option("--out", aug_args.out, "Output directory")->required();
  level_opt->needs(family_opt);
  family_opt->excludes(preset_opt);
  level_opt->excludes(preset_opt);

  EmbedArgs embed_args;
  auto* embed_cmd = app.add_subcommand("embed", "Run an external feature extractor");
  auto* images_opt = embed_cmd->add_option("--images", embed_args.images, "Image list file");
  auto* emanifest_opt =
      embed_cmd->add_option("--manifest", embed_args.manifest, "Augmentation manifest");
  auto* esources_opt = embed_cmd->add_option("--sources", embed_args.sources, "Sources JSON");
  images_opt->excludes(emanifest_opt)->excludes(esources_opt);
  emanifest_opt->excludes(esources_opt);
  embed_cmd->add_option("--space", embed_args.space, "fid|cmmd, selects extractor.<space>")
      ->check(CLI::IsMember({"fid", "cmmd"}))
      ->capture_default_str();
  embed_cmd->add_option("--command", embed_args.command,
                        "Extractor template with {input_list} and {output}");
  embed_cmd->add_option("--out", embed_args.out, "WXE1 file to write")->required();

  MetricsArgs metrics_args;
  auto* metrics_cmd = app.add_subcommand("metrics", "Cross-set FID/CMMD distance matrix");
  metrics_cmd->add_option("--row", metrics_args.rows, "NAME=FID.wxe[,CMMD.wxe] (repeatable)")
      ->required();
  metrics_cmd
      ->add_option("--trigger", metrics_args.triggers, "NAME=FID.wxe[,CMMD.wxe] (repeatable)")
      ->required();
  metrics_cmd->add_option("--metric", metrics_args.metric, "fid|cmmd|both")
      ->check(CLI::IsMember({"fid", "cmmd", "both"}))
      ->capture_default_str();
  metrics_cmd->add_option("--out", metrics_args.out, "Distance CSV to write")->required();
  metrics_cmd->add_option("--json", metrics_args.json, "Structured report to write");

  ContrastiveArgs con_args;
  auto* con_cmd = app.add_subcommand("contrastive", "Append contrastive scores to a distance CSV");
  con_cmd->add_option("--distances", con_args.distances, "Distance CSV")->required();
  con_cmd->add_option("--target", con_args.target, "Target trigger")->required();
  con_cmd->add_option("--out", con_args.out, "CSV to write (default: in place)");
  con_cmd->add_option("--precision", con_args.precision, "Printed decimals")
      ->check(CLI::Range(0, 17))
      ->capture_default_str();

  CorrelateArgs cor_args;
  auto* cor_cmd = app.add_subcommand("correlate", "Pearson correlation of two table columns");
  cor_cmd->add_option("--table", cor_args.table, "Results CSV")->required();
  cor_cmd->add_option("--x", cor_args.x, "Metric column")->required();
  cor_cmd->add_option("--y", cor_args.y, "Results column")->required();
  cor_cmd->add_option("--exclude", cor_args.exclude, "Regex of row names to skip")
      ->capture_default_str();
  cor_cmd->add_option("--json", cor_args.json, "Structured report to write");

  ReportArgs rep_args;
  auto* rep_cmd = app.add_subcommand("report", "Minimal-distance or PCA report");
  rep_cmd->add_option("--kind", rep_args.kind, "min-distance|pca")
      ->check(CLI::IsMember({"min-distance", "pca"}))
      ->capture_default_str();
  rep_cmd->add_option("--table", rep_args.table, "Distance or results CSV");
  rep_cmd->add_option("--metric", rep_args.metric, "Metric columns to use")
      ->capture_default_str();
  rep_cmd->add_option("--group", rep_args.groups, "LABEL=REGEX row grouping (repeatable)");
  rep_cmd->add_option("--embedding", rep_args.embeddings, "LABEL=PATH for pca (repeatable)");
  rep_cmd->add_option("--out", rep_args.out, "CSV to write (default: stdout)");
  rep_cmd->add_option("--json", rep_args.json, "Structured report to write");

  ServeArgs serve_args;
  std::string host;
  int port = -1;
  std::string static_dir;
  auto* serve_cmd = app.add_subcommand("serve", "Run the preview service");
  serve_cmd->add_option("--sources", serve_args.sources, "Sources JSON from ingest");
  auto* host_opt = serve_cmd->add_option("--host", host, "Bind address");
  auto* port_opt = serve_cmd->add_option("--port", port, "Port (0: any free port)")
                       ->check(CLI::Range(0, 65535));
  auto* static_opt = serve_cmd->add_option("--static", static_dir, "Static asset directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error:usage-error:" << e.what() << "\n";
    err << "Run with --help for more information.\n";
    return kExitUsage;
  }

  CliConfig config;
  try {
    std::string path = config_path;
    if (path.empty()) {
      if (const char* env = std::getenv("WXFORGE_CONFIG"); env != nullptr) {
        path = env;
      }
    }
    if (!path.empty()) {
      apply_config(config, toml::parse_file(path));
    }
    for (const auto& o : overrides) {
      apply_override(config, o);
    }
    if (log_opt->count() > 0) {
      config.log_level = log_level;
    }
    if (workers_opt->count() > 0) {
      config.workers = workers;
    }
    if (tables_opt->count() > 0) {
      config.tables = tables;
    }
    if (host_opt->count() > 0) {
      config.serve_host = host;
    }
    if (port_opt->count() > 0) {
      config.serve_port = port;
    }
    if (static_opt->count() > 0) {
      config.serve_static_dir = static_dir;
    }
    set_log_level(config.log_level);

    if (print_config) {
      out << config_to_toml(config);
      return kExitOk;
    }
    if (app.get_subcommands().empty()) {
      err << "error:usage-error:a subcommand is required\n" << app.help();
      return kExitUsage;
    }
    if (aug_cmd->parsed()) {
      if (aug_args.preset.empty() && (family_opt->count() == 0 || level_opt->count() == 0)) {
        throw UsageError("augment needs --family and --level, or --preset");
      }
      return cmd_augment(config, aug_args, seed_opt->count() > 0, out);
    }
    if (ingest_cmd->parsed()) {
      return cmd_ingest(ingest_args, out);
    }
    if (embed_cmd->parsed()) {
      if (embed_args.images.empty() && embed_args.manifest.empty() && embed_args.sources.empty()) {
        throw UsageError("embed needs one of --images, --manifest, --sources");
      }
      return cmd_embed(config, embed_args, out);
    }
    if (metrics_cmd->parsed()) {
      return cmd_metrics(config, metrics_args, out);
    }
    if (con_cmd->parsed()) {
      return cmd_contrastive(con_args, out);
    }
    if (cor_cmd->parsed()) {
      return cmd_correlate(cor_args, out);
    }
    if (rep_cmd->parsed()) {
      return cmd_report(config, rep_args, out);
    }
    if (serve_cmd->parsed()) {
      return cmd_serve(config, serve_args, out);
    }
  } catch (const UsageError& e) {
    err << "error:usage-error:" << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error:" << e.kind() << ":" << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error:internal:" << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}

}  // namespace wxforge
