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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wxforge {

/// Named rows × named numeric columns, read from and written to CSV.
/// The first CSV column holds the row names; empty cells are NaN.
struct DataTable {
  std::string key_column = "name";
  std::vector<std::string> columns;
  std::vector<std::string> rows;
  std::vector<std::vector<double>> values;  ///< rows × columns

  std::optional<std::size_t> column_index(std::string_view name) const noexcept;
  std::optional<std::size_t> row_index(std::string_view name) const noexcept;
  /// Errors: unknown-column.
  std::vector<double> column(std::string_view name) const;
  void add_column(std::string name, std::vector<double> data);

  /// Errors: parse-error with the line number, io-error.
  static DataTable parse_csv(std::string_view text, std::string_view source = "<csv>");
  static DataTable read_csv(const std::filesystem::path& path);
  /// Shortest round-trip formatting; NaN as an empty cell.
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
};

/// Shortest decimal string that parses back to `v`.
std::string format_number(double v);

/// Writes `bytes` to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace wxforge
