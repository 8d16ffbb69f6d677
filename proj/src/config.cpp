// Copyright 2026 The PMM Twin Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#include "pmm/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "pmm/error.hpp"

namespace pmm::config {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::istream& in) {
  KeyValueFile f;
  std::string line;
  std::string current;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": bad section header");
      }
      current = trim(line.substr(1, line.size() - 2));
      f.sections_[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": empty key");
    }
    f.sections_[current][key] = trim(line.substr(eq + 1));
  }
  return f;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  return parse(in);
}

const KeyValueFile::Section* KeyValueFile::section(const std::string& name) const {
  auto it = sections_.find(name);
  return it == sections_.end() ? nullptr : &it->second;
}

std::optional<std::string> KeyValueFile::get(const std::string& sec, const std::string& key) const {
  const auto* s = section(sec);
  if (!s) return std::nullopt;
  auto it = s->find(key);
  if (it == s->end()) return std::nullopt;
  return it->second;
}

double KeyValueFile::get_double(const std::string& sec, const std::string& key, double fallback) const {
  auto v = get(sec, key);
  return v ? parse_double(*v) : fallback;
}

long KeyValueFile::get_long(const std::string& sec, const std::string& key, long fallback) const {
  auto v = get(sec, key);
  return v ? parse_long(*v) : fallback;
}

void KeyValueFile::set(const std::string& sec, const std::string& key, const std::string& value) {
  sections_[sec][key] = value;
}

void KeyValueFile::write(std::ostream& out) const {
  bool first = true;
  for (const auto& [name, kv] : sections_) {
    if (!name.empty()) {
      if (!first) out << '\n';
      out << '[' << name << "]\n";
    }
    for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
    first = false;
  }
}

double parse_double(const std::string& text) {
  const auto t = trim(text);
  double v = 0.0;
  const char* b = t.data();
  const char* e = b + t.size();
  if (b != e && *b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || t.empty()) {
    throw Error(ErrorCode::ParseError, "not a number: '" + text + "'");
  }
  return v;
}

long parse_long(const std::string& text) {
  const auto t = trim(text);
  long v = 0;
  const char* b = t.data();
  const char* e = b + t.size();
  if (b != e && *b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || t.empty()) {
    throw Error(ErrorCode::ParseError, "not an integer: '" + text + "'");
  }
  return v;
}

std::string format_double(double value) {
  char buf[64];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, value);
    double back = 0.0;
    std::from_chars(buf, buf + std::char_traits<char>::length(buf), back);
    if (back == value) break;
  }
  return buf;
}

}  // namespace pmm::config
