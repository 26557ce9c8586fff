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

// The `wxforge` command line: ingest → augment → embed → metrics →
// contrastive → correlate → report, plus `serve`.
//
// Settings resolve in this order, later winning: built-in defaults, the
// config file (--config, else $WXFORGE_CONFIG), --set key=value overrides,
// dedicated flags such as --workers.
//
// Exit codes: 0 success, 1 domain error, 2 usage error. Errors are printed
// to stderr as `error:<kind>:<message>`.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "wxforge/toml_lite.hpp"

namespace wxforge {

struct CliConfig {
  int workers = 1;
  std::string log_level = "warn";
  std::uint64_t seed = 0;
  std::string tables;      ///< intensity tables file; empty for the built-in tables
  std::string space_tags;  ///< space-tag registry file; empty for the built-in registry
  double cmmd_sigma = 10.0;
  double cmmd_scale = 1000.0;
  std::string cmmd_estimator = "unbiased";
  std::string extractor_fid;   ///< command template for the FID space
  std::string extractor_cmmd;  ///< command template for the CMMD space
  std::string serve_host = "127.0.0.1";
  int serve_port = 8765;
  std::string serve_static_dir;
};

/// Applies one dotted key (`workers`, `cmmd.sigma`, `serve.port`, ...).
/// Errors: invalid-argument for unknown keys or ill-typed values.
void apply_setting(CliConfig& config, std::string_view key, const toml::Value& value);
/// Every entry of a config document.
void apply_config(CliConfig& config, const toml::Document& doc);
/// `key=value`; the value is read as a TOML value, else as a bare string.
void apply_override(CliConfig& config, std::string_view assignment);
/// The resolved configuration in config-file syntax.
std::string config_to_toml(const CliConfig& config);

/// Runs one command line; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wxforge
