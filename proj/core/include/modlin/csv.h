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

#ifndef MODLIN_CSV_H_
#define MODLIN_CSV_H_

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace modlin {

// Locale-independent, fixed-precision formatting so that identical runs
// produce byte-identical files.
std::string FormatDouble(double value, int precision = 10);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);

  void Row(const std::vector<std::string>& fields);
  void Row(const std::vector<double>& values, int precision = 10);

  std::size_t columns() const { return header_.size(); }

 private:
  std::ostream& out_;
  std::vector<std::string> header_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a named column; throws ParameterError naming the column when it
  // is absent.
  std::size_t Column(const std::string& name) const;
  std::vector<double> NumericColumn(const std::string& name) const;
};

CsvTable ReadCsv(const std::filesystem::path& path, bool has_header = true);

void WriteMatrixCsv(const Eigen::MatrixXd& m, const std::filesystem::path& path,
                    int precision = 17);
Eigen::MatrixXd ReadMatrixCsv(const std::filesystem::path& path);

// Ordered key=value text files.
using KeyValues = std::map<std::string, std::string>;
void WriteKeyValues(const KeyValues& kv, const std::filesystem::path& path);
KeyValues ReadKeyValues(const std::filesystem::path& path);

}  // namespace modlin

#endif  // MODLIN_CSV_H_
