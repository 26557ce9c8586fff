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

#include "wxforge/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "wxforge/error.hpp"

namespace wxforge::toml {

namespace {

class LineParser {
 public:
  LineParser(std::string_view text, std::string_view source, int line)
      : text_(text), source_(source), line_(line) {}

  [[noreturn]] void fail(std::string_view what) const {
    throw Error(errc::kParse, fmt::format("{}:{}: {}", source_, line_, what));
  }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) {
      ++pos_;
    }
  }

  bool at_end_or_comment() {
    skip_ws();
    return pos_ >= text_.size() || text_[pos_] == '#';
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!consume(c)) {
      fail(fmt::format("expected '{}'", c));
    }
  }

  std::string key() {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '"') {
      return basic_string();
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
        ++pos_;
      } else {
        break;
      }
    }
    if (pos_ == start) {
      fail("expected a key");
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string dotted_key() {
    std::string k = key();
    while (consume('.')) {
      k += '.';
      k += key();
    }
    return k;
  }

  std::string basic_string() {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != '"') {
      fail("expected '\"'");
    }
    ++pos_;
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      char c = text_[pos_++];
      if (c == '\\') {
        if (pos_ >= text_.size()) {
          fail("unterminated escape");
        }
        const char e = text_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case 'r': c = '\r'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(fmt::format("unsupported escape \\{}", e));
        }
      }
      out += c;
    }
    if (pos_ >= text_.size()) {
      fail("unterminated string");
    }
    ++pos_;
    return out;
  }

  double number() {
    skip_ws();
    std::size_t start = pos_;
    if (pos_ < text_.size() && text_[pos_] == '+') {
      ++start;
      ++pos_;
    }
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == 'e' ||
          c == 'E' || c == '+') {
        ++pos_;
      } else {
        break;
      }
    }
    const std::string_view token = text_.substr(start, pos_ - start);
    if (token == "inf" || token == "nan") {
      fail("non-finite numbers are not allowed");
    }
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size()) {
      fail(fmt::format("invalid number '{}'", token));
    }
    return v;
  }

  Value value() {
    skip_ws();
    if (pos_ >= text_.size()) {
      fail("missing value");
    }
    const char c = text_[pos_];
    if (c == '"') {
      return basic_string();
    }
    if (c == '[') {
      ++pos_;
      std::vector<double> arr;
      if (consume(']')) {
        return arr;
      }
      while (true) {
        arr.push_back(number());
        if (consume(']')) {
          break;
        }
        expect(',');
        if (consume(']')) {
          break;
        }
      }
      return arr;
    }
    if (text_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return false;
    }
    if (c == '{') {
      fail("inline tables are not supported");
    }
    return number();
  }

 private:
  std::string_view text_;
  std::string_view source_;
  int line_;
  std::size_t pos_ = 0;
};

std::string format_number(double v) {
  if (std::floor(v) == v && std::abs(v) < 1e15) {
    return fmt::format("{}", static_cast<long long>(v));
  }
  return fmt::format("{}", v);
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

bool is_bare_key(std::string_view k) {
  if (k.empty()) {
    return false;
  }
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
      return false;
    }
  }
  return true;
}

}  // namespace

const Entry* Table::find(std::string_view key) const noexcept {
  for (const auto& e : entries) {
    if (e.key == key) {
      return &e;
    }
  }
  return nullptr;
}

std::optional<double> Table::number(std::string_view key) const {
  const Entry* e = find(key);
  if (e == nullptr) {
    return std::nullopt;
  }
  if (const auto* d = std::get_if<double>(&e->value)) {
    return *d;
  }
  throw Error(errc::kParse, fmt::format("[{}] {}: expected a number", name, key));
}

std::optional<std::string> Table::string(std::string_view key) const {
  const Entry* e = find(key);
  if (e == nullptr) {
    return std::nullopt;
  }
  if (const auto* s = std::get_if<std::string>(&e->value)) {
    return *s;
  }
  throw Error(errc::kParse, fmt::format("[{}] {}: expected a string", name, key));
}

std::optional<bool> Table::boolean(std::string_view key) const {
  const Entry* e = find(key);
  if (e == nullptr) {
    return std::nullopt;
  }
  if (const auto* b = std::get_if<bool>(&e->value)) {
    return *b;
  }
  throw Error(errc::kParse, fmt::format("[{}] {}: expected a boolean", name, key));
}

const Table* Document::find(std::string_view name) const noexcept {
  for (const auto& t : tables) {
    if (t.name == name) {
      return &t;
    }
  }
  return nullptr;
}

Document parse(std::string_view text, std::string_view source) {
  Document doc;
  Table* current = &doc.root;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    ++line_no;
    LineParser p(line, source, line_no);
    if (!p.at_end_or_comment()) {
      if (p.consume('[')) {
        if (p.consume('[')) {
          p.fail("arrays of tables are not supported");
        }
        std::string name = p.dotted_key();
        p.expect(']');
        if (!p.at_end_or_comment()) {
          p.fail("trailing characters after table header");
        }
        if (doc.find(name) != nullptr) {
          p.fail(fmt::format("duplicate table [{}]", name));
        }
        doc.tables.push_back(Table{name, {}, line_no});
        current = &doc.tables.back();
      } else {
        std::string key = p.dotted_key();
        p.expect('=');
        Value v = p.value();
        if (!p.at_end_or_comment()) {
          p.fail("trailing characters after value");
        }
        if (current->find(key) != nullptr) {
          p.fail(fmt::format("duplicate key '{}'", key));
        }
        current->entries.push_back(Entry{std::move(key), std::move(v), line_no});
      }
    }
    if (end == text.size()) {
      break;
    }
    start = end + 1;
  }
  return doc;
}

Document parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(errc::kIo, fmt::format("cannot open {}", path));
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::string format_value(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_number(x);
        } else if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return quote(x);
        } else {
          std::string out = "[";
          for (std::size_t i = 0; i < x.size(); ++i) {
            if (i > 0) {
              out += ", ";
            }
            out += format_number(x[i]);
          }
          return out + "]";
        }
      },
      v);
}

std::string format_table(const Table& t) {
  std::string out;
  if (!t.name.empty()) {
    out += "[" + t.name + "]\n";
  }
  for (const auto& e : t.entries) {
    out += (is_bare_key(e.key) ? e.key : quote(e.key)) + " = " + format_value(e.value) + "\n";
  }
  return out;
}

}  // namespace wxforge::toml
