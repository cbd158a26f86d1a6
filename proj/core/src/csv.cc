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

#include "modlin/csv.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "modlin/errors.h"

namespace modlin {

std::string FormatDouble(double value, int precision) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";  // folds -0 into 0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value,
                           std::chars_format::general, precision);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header)
    : out_(out), header_(std::move(header)) {
  Row(header_);
}

void CsvWriter::Row(const std::vector<std::string>& fields) {
  if (fields.size() != header_.size()) {
    throw ParameterError("csv row has " + std::to_string(fields.size()) +
                         " fields, header has " +
                         std::to_string(header_.size()));
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n") == std::string::npos) {
      out_ << f;
      continue;
    }
    out_ << '"';
    for (char ch : f) {
      if (ch == '"') out_ << '"';
      out_ << ch;
    }
    out_ << '"';
  }
  out_ << '\n';
}

void CsvWriter::Row(const std::vector<double>& values, int precision) {
  std::vector<std::string> fields;
  fields.reserve(values.size());
  for (double v : values) fields.push_back(FormatDouble(v, precision));
  Row(fields);
}

std::size_t CsvTable::Column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ParameterError("missing column '" + name + "'");
}

namespace {

double ParseDouble(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParameterError("not a number: '" + s + "'");
  }
  return v;
}

// Double-quoted fields may hold separators; "" inside quotes is a quote.
std::vector<std::string> SplitLine(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch != '"') {
        field += ch;
      } else if (i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else {
        quoted = false;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == sep) {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += ch;
    }
  }
  if (quoted) throw ParameterError("unterminated quote in csv line");
  out.push_back(std::move(field));
  return out;
}

}  // namespace

std::vector<double> CsvTable::NumericColumn(const std::string& name) const {
  const std::size_t c = Column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (c >= row.size()) throw ParameterError("short csv row");
    out.push_back(ParseDouble(row[c]));
  }
  return out;
}

CsvTable ReadCsv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = SplitLine(line, ',');
    if (first && has_header) {
      table.header = std::move(fields);
    } else {
      table.rows.push_back(std::move(fields));
    }
    first = false;
  }
  return table;
}

void WriteMatrixCsv(const Eigen::MatrixXd& m, const std::filesystem::path& path,
                    int precision) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write " + path.string());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << FormatDouble(m(i, j), precision);
    }
    out << '\n';
  }
}

Eigen::MatrixXd ReadMatrixCsv(const std::filesystem::path& path) {
  CsvTable t = ReadCsv(path, /*has_header=*/false);
  if (t.rows.empty()) return Eigen::MatrixXd(0, 0);
  const std::size_t cols = t.rows.front().size();
  Eigen::MatrixXd m(t.rows.size(), cols);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.rows[i].size() != cols) {
      throw ParameterError("ragged matrix csv " + path.string());
    }
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = ParseDouble(t.rows[i][j]);
  }
  return m;
}

void WriteKeyValues(const KeyValues& kv, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write " + path.string());
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

KeyValues ReadKeyValues(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open " + path.string());
  KeyValues kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("malformed key=value line: " + line);
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

}  // namespace modlin
