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

#ifndef MODLIN_CONFIG_H_
#define MODLIN_CONFIG_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace modlin {

// Plain-text config: `key = value` lines, `#` comments, and `[kind label]`
// section headers. Keys before the first header are global.
//
//   repeats = 3
//   [run deep]
//   arch = dense
struct ConfigSection {
  std::string kind;
  std::string label;
  std::map<std::string, std::string> values;
  int line = 0;
};

struct ConfigTree {
  std::map<std::string, std::string> globals;
  std::vector<ConfigSection> sections;
};

// Throws ParameterError with the offending line number.
ConfigTree ParseConfig(const std::string& text);
ConfigTree ReadConfigFile(const std::filesystem::path& path);

// Typed field access with messages of the form "<where>: field '<key>': ...".
class FieldReader {
 public:
  FieldReader(std::string where, const std::map<std::string, std::string>& values)
      : where_(std::move(where)), values_(values) {}

  std::optional<std::string> String(const std::string& key) const;
  std::optional<long long> Integer(const std::string& key) const;
  std::optional<double> Real(const std::string& key) const;
  std::optional<bool> Boolean(const std::string& key) const;
  std::optional<std::vector<int>> IntegerList(const std::string& key) const;

  // Throws if any key was never requested.
  void RejectUnknown() const;

 private:
  [[noreturn]] void Fail(const std::string& key, const std::string& msg) const;

  std::string where_;
  const std::map<std::string, std::string>& values_;
  mutable std::vector<std::string> seen_;
};

}  // namespace modlin

#endif  // MODLIN_CONFIG_H_
