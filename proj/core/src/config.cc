// Copyright 2026 The modlin Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "modlin/config.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "modlin/errors.h"

namespace modlin {
namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

ConfigTree ParseConfig(const std::string& text) {
  ConfigTree tree;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  std::map<std::string, std::string>* target = &tree.globals;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = Trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ParameterError(where + ": unterminated section");
      std::istringstream header(line.substr(1, line.size() - 2));
      ConfigSection section;
      section.line = line_no;
      header >> section.kind >> section.label;
      std::string extra;
      if (section.kind.empty() || (header >> extra)) {
        throw ParameterError(where + ": expected [kind label]");
      }
      tree.sections.push_back(std::move(section));
      target = &tree.sections.back().values;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParameterError(where + ": expected key = value");
    const std::string key = Trim(line.substr(0, eq));
    if (key.empty()) throw ParameterError(where + ": empty key");
    if (!target->emplace(key, Trim(line.substr(eq + 1))).second) {
      throw ParameterError(where + ": duplicate key '" + key + "'");
    }
  }
  return tree;
}

ConfigTree ReadConfigFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return ParseConfig(text.str());
}

void FieldReader::Fail(const std::string& key, const std::string& msg) const {
  throw ParameterError(where_ + ": field '" + key + "': " + msg);
}

std::optional<std::string> FieldReader::String(const std::string& key) const {
  seen_.push_back(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<long long> FieldReader::Integer(const std::string& key) const {
  const auto s = String(key);
  if (!s) return std::nullopt;
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
  if (ec != std::errc() || ptr != s->data() + s->size()) {
    Fail(key, "expected an integer, got '" + *s + "'");
  }
  return v;
}

std::optional<double> FieldReader::Real(const std::string& key) const {
  const auto s = String(key);
  if (!s) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
  if (ec != std::errc() || ptr != s->data() + s->size()) {
    Fail(key, "expected a number, got '" + *s + "'");
  }
  return v;
}

std::optional<bool> FieldReader::Boolean(const std::string& key) const {
  const auto s = String(key);
  if (!s) return std::nullopt;
  if (*s == "true" || *s == "1" || *s == "yes") return true;
  if (*s == "false" || *s == "0" || *s == "no") return false;
  Fail(key, "expected true or false, got '" + *s + "'");
}

std::optional<std::vector<int>> FieldReader::IntegerList(
    const std::string& key) const {
  const auto s = String(key);
  if (!s) return std::nullopt;
  std::vector<int> out;
  std::istringstream in(*s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      Fail(key, "expected a comma-separated integer list, got '" + *s + "'");
    }
    out.push_back(v);
  }
  return out;
}

void FieldReader::RejectUnknown() const {
  for (const auto& [key, value] : values_) {
    if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
      Fail(key, "unknown field");
    }
  }
}

}  // namespace modlin
