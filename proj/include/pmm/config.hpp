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

#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

namespace pmm::config {

// Plain-text `key = value` file with optional `[section]` headers and `#`
// comments. Keys before the first header land in the "" section.
class KeyValueFile {
 public:
  using Section = std::map<std::string, std::string>;

  static KeyValueFile parse(std::istream& in);
  static KeyValueFile load(const std::string& path);

  const std::map<std::string, Section>& sections() const { return sections_; }
  bool has_section(const std::string& name) const { return sections_.count(name) > 0; }
  const Section* section(const std::string& name) const;

  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  long get_long(const std::string& section, const std::string& key, long fallback) const;

  void set(const std::string& section, const std::string& key, const std::string& value);
  void write(std::ostream& out) const;

 private:
  std::map<std::string, Section> sections_;
};

// Locale-independent number parsing; throws pmm::Error(ParseError).
double parse_double(const std::string& text);
long parse_long(const std::string& text);

// Shortest round-trippable decimal text for a double ("%.17g" trimmed).
std::string format_double(double value);

}  // namespace pmm::config
