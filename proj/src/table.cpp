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

#include "wxforge/table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "wxforge/error.hpp"

namespace wxforge {

namespace {

std::vector<std::string> split_csv_line(std::string_view line, std::string_view source,
                                        int line_no) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  if (quoted) {
    throw Error(errc::kParse, fmt::format("{}:{}: unterminated quote", source, line_no));
  }
  out.push_back(std::move(cell));
  return out;
}

std::string csv_cell(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) {
    return std::string(s);
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') {
      out += '"';
    }
    out += c;
  }
  return out + '"';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

std::optional<std::size_t> DataTable::column_index(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) {
      return i;
    }
  }
  return std::nullopt;
}

std::optional<std::size_t> DataTable::row_index(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] == name) {
      return i;
    }
  }
  return std::nullopt;
}

std::vector<double> DataTable::column(std::string_view name) const {
  const auto idx = column_index(name);
  if (!idx) {
    throw Error(errc::kUnknownColumn, fmt::format("no column named '{}'", name));
  }
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : values) {
    out.push_back(row[*idx]);
  }
  return out;
}

void DataTable::add_column(std::string name, std::vector<double> data) {
  if (data.size() != rows.size()) {
    throw Error(errc::kLengthMismatch,
                fmt::format("column '{}' has {} values for {} rows", name, data.size(), rows.size()));
  }
  if (const auto idx = column_index(name)) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      values[r][*idx] = data[r];
    }
    return;
  }
  columns.push_back(std::move(name));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    values[r].push_back(data[r]);
  }
}

DataTable DataTable::parse_csv(std::string_view text, std::string_view source) {
  DataTable t;
  int line_no = 0;
  bool have_header = false;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    const std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') {
      continue;
    }
    std::vector<std::string> cells = split_csv_line(line, source, line_no);
    if (!have_header) {
      t.key_column = std::string(trim(cells.front()));
      for (std::size_t i = 1; i < cells.size(); ++i) {
        t.columns.emplace_back(trim(cells[i]));
      }
      have_header = true;
      continue;
    }
    if (cells.size() != t.columns.size() + 1) {
      throw Error(errc::kParse, fmt::format("{}:{}: expected {} cells, got {}", source, line_no,
                                            t.columns.size() + 1, cells.size()));
    }
    std::vector<double> row;
    row.reserve(t.columns.size());
    for (std::size_t i = 1; i < cells.size(); ++i) {
      const std::string_view cell = trim(cells[i]);
      if (cell.empty()) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw Error(errc::kParse, fmt::format("{}:{}: column '{}': '{}' is not a number", source,
                                              line_no, t.columns[i - 1], cell));
      }
      row.push_back(v);
    }
    const std::string name(trim(cells.front()));
    if (t.row_index(name)) {
      throw Error(errc::kParse, fmt::format("{}:{}: duplicate row '{}'", source, line_no, name));
    }
    t.rows.push_back(name);
    t.values.push_back(std::move(row));
  }
  if (!have_header) {
    throw Error(errc::kParse, fmt::format("{}: missing header", source));
  }
  return t;
}

DataTable DataTable::read_csv(const std::filesystem::path& path) {
  return parse_csv(read_text_file(path), path.string());
}

std::string DataTable::to_csv() const {
  std::string out = csv_cell(key_column);
  for (const auto& c : columns) {
    out += ',' + csv_cell(c);
  }
  out += '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += csv_cell(rows[r]);
    for (double v : values[r]) {
      out += ',';
      if (!std::isnan(v)) {
        out += format_number(v);
      }
    }
    out += '\n';
  }
  return out;
}

void DataTable::write_csv(const std::filesystem::path& path) const {
  write_file_atomic(path, to_csv());
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(errc::kIo, fmt::format("cannot write {}", tmp.string()));
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      throw Error(errc::kIo, fmt::format("short write to {}", tmp.string()));
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw Error(errc::kIo, fmt::format("cannot rename {} to {}: {}", tmp.string(), path.string(),
                                       ec.message()));
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(errc::kIo, fmt::format("cannot open {}", path.string()));
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace wxforge
