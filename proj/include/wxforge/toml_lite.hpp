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

// The subset of TOML used by the parameter tables, the space-tag registry
// and the CLI config: `[dotted.table]` headers, `key = value` pairs with
// numbers, booleans, basic strings and single-line numeric arrays, and `#`
// comments. Inline tables, arrays of tables and multi-line values are not
// supported and are reported as parse errors.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace wxforge::toml {

using Value = std::variant<double, bool, std::string, std::vector<double>>;

struct Entry {
  std::string key;
  Value value;
  int line = 0;
};

struct Table {
  std::string name;  ///< dotted path, empty for the root table
  std::vector<Entry> entries;
  int line = 0;

  const Entry* find(std::string_view key) const noexcept;
  std::optional<double> number(std::string_view key) const;
  std::optional<std::string> string(std::string_view key) const;
  std::optional<bool> boolean(std::string_view key) const;
};

struct Document {
  Table root;
  std::vector<Table> tables;  ///< in file order

  const Table* find(std::string_view name) const noexcept;
};

/// Throws parse-error naming `source` and the offending line.
Document parse(std::string_view text, std::string_view source = "<toml>");
Document parse_file(const std::string& path);

std::string format_value(const Value& v);
/// `[name]` header followed by one `key = value` line per entry.
std::string format_table(const Table& t);

}  // namespace wxforge::toml
