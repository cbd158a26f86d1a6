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

#include "modlin/dataset.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "modlin/csv.h"
#include "modlin/errors.h"

namespace modlin {
namespace {

constexpr int kMaxBits = 12;

std::string FormatRange(const RowRange& r) {
  return std::to_string(r.begin) + ":" + std::to_string(r.end);
}

RowRange ParseRange(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ParameterError("bad range: " + s);
  return {std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))};
}

BlockLayout MakeLayout(int comp_in, int noncomp_in, int comp_out,
                       int noncomp_out) {
  BlockLayout l;
  l.comp_input = {0, comp_in};
  l.noncomp_input = {comp_in, comp_in + noncomp_in};
  l.comp_output = {0, comp_out};
  l.noncomp_output = {comp_out, comp_out + noncomp_out};
  return l;
}

}  // namespace

void DatasetParams::Validate() const {
  std::ostringstream err;
  if (n_x < 1) err << "n_x must be >= 1 (got " << n_x << "); ";
  if (n_x > kMaxBits) err << "n_x must be <= " << kMaxBits << "; ";
  if (n_y < 0 || k_x < 0 || k_y < 0) err << "counts must be >= 0; ";
  if (n_y > n_x) err << "n_y (" << n_y << ") must not exceed n_x; ";
  if ((k_x > 0 || k_y > 0) && !(r > 0.0)) {
    err << "r must be > 0 when identity blocks are present; ";
  }
  if (!err.str().empty()) throw ParameterError("invalid dataset params: " + err.str());
}

std::string ToString(const DatasetParams& p) {
  std::ostringstream s;
  s << "(n_x=" << p.n_x << ", n_y=" << p.n_y << ", k_x=" << p.k_x
    << ", k_y=" << p.k_y << ", r=" << FormatDouble(p.r) << ")";
  return s.str();
}

Eigen::MatrixXd SignPatterns(int n_bits) {
  const int n = 1 << n_bits;
  Eigen::MatrixXd omega(n_bits, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n_bits; ++i) omega(i, j) = ((j >> i) & 1) ? 1.0 : -1.0;
  }
  return omega;
}

Dataset BuildDataset(const DatasetParams& params, FeatureChoice choice,
                     std::uint64_t seed) {
  params.Validate();
  const int p = params.NumPatterns();

  Dataset d;
  d.params = params;
  d.layout = MakeLayout(params.n_x, params.k_x * p, params.n_y, params.k_y * p);

  if (choice == FeatureChoice::kFirst) {
    d.selected_features.resize(params.n_y);
    std::iota(d.selected_features.begin(), d.selected_features.end(), 0);
  } else {
    std::vector<int> all(params.n_x);
    std::iota(all.begin(), all.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(all.begin(), all.end(), rng);
    d.selected_features.assign(all.begin(), all.begin() + params.n_y);
  }

  const Eigen::MatrixXd omega = SignPatterns(params.n_x);
  const Eigen::MatrixXd block = params.r * Eigen::MatrixXd::Identity(p, p);

  d.input.setZero(params.InputDim(), p);
  d.input.topRows(params.n_x) = omega;
  for (int b = 0; b < params.k_x; ++b) {
    d.input.middleRows(params.n_x + b * p, p) = block;
  }

  d.output.setZero(params.OutputDim(), p);
  for (int s = 0; s < params.n_y; ++s) {
    d.output.row(s) = omega.row(d.selected_features[s]);
  }
  for (int b = 0; b < params.k_y; ++b) {
    d.output.middleRows(params.n_y + b * p, p) = block;
  }
  return d;
}

Dataset StripCompositionalInput(const Dataset& dataset) {
  if (!dataset.comp_input_present) return dataset;
  if (dataset.layout.noncomp_input.empty()) {
    throw ParameterError("cannot strip compositional input: no identity blocks");
  }
  if (!dataset.layout.comp_output.empty()) {
    throw ParameterError(
        "cannot strip compositional input while compositional outputs remain");
  }
  Dataset d = dataset;
  const RowRange nc = dataset.layout.noncomp_input;
  d.input = dataset.input.middleRows(nc.begin, nc.size());
  d.layout = MakeLayout(0, nc.size(), dataset.layout.comp_output.size(),
                        dataset.layout.noncomp_output.size());
  d.comp_input_present = false;
  return d;
}

Eigen::MatrixXd GatherColumns(const Eigen::MatrixXd& m,
                              std::span<const int> columns) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] < 0 || columns[j] >= m.cols()) {
      throw ParameterError("example column out of range");
    }
    out.col(static_cast<Eigen::Index>(j)) = m.col(columns[j]);
  }
  return out;
}

CovariancePair Covariances(const Dataset& d) {
  const double inv = 1.0 / d.NumExamples();
  CovariancePair c;
  c.sigma_x = inv * d.input * d.input.transpose();
  c.sigma_yx = inv * d.output * d.input.transpose();
  return c;
}

CovariancePair Covariances(const Dataset& d, std::span<const int> columns) {
  if (columns.empty()) throw ParameterError("empty column subset");
  const Eigen::MatrixXd x = GatherColumns(d.input, columns);
  const Eigen::MatrixXd y = GatherColumns(d.output, columns);
  const double inv = 1.0 / static_cast<double>(columns.size());
  CovariancePair c;
  c.sigma_x = inv * x * x.transpose();
  c.sigma_yx = inv * y * x.transpose();
  return c;
}

Eigen::MatrixXd OutputCovariance(const Dataset& d,
                                 std::span<const int> columns) {
  if (columns.empty()) {
    return (1.0 / d.NumExamples()) * d.output * d.output.transpose();
  }
  const Eigen::MatrixXd y = GatherColumns(d.output, columns);
  return (1.0 / static_cast<double>(columns.size())) * y * y.transpose();
}

ExampleSplit SplitExamples(const Dataset& d, int n_train, std::uint64_t seed) {
  const int p = d.NumExamples();
  if (n_train < 1 || n_train > p) {
    throw ParameterError("n_train must be in [1, " + std::to_string(p) +
                         "], got " + std::to_string(n_train));
  }
  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  ExampleSplit s;
  s.train.assign(order.begin(), order.begin() + n_train);
  s.test.assign(order.begin() + n_train, order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

void WriteDataset(const Dataset& d, const std::filesystem::path& dir,
                  const std::string& stem) {
  std::filesystem::create_directories(dir);
  WriteMatrixCsv(d.input, dir / (stem + "_input.csv"));
  WriteMatrixCsv(d.output, dir / (stem + "_output.csv"));

  KeyValues kv;
  kv["n_x"] = std::to_string(d.params.n_x);
  kv["n_y"] = std::to_string(d.params.n_y);
  kv["k_x"] = std::to_string(d.params.k_x);
  kv["k_y"] = std::to_string(d.params.k_y);
  kv["r"] = FormatDouble(d.params.r, 17);
  kv["comp_input_present"] = d.comp_input_present ? "1" : "0";
  kv["comp_input_rows"] = FormatRange(d.layout.comp_input);
  kv["noncomp_input_rows"] = FormatRange(d.layout.noncomp_input);
  kv["comp_output_rows"] = FormatRange(d.layout.comp_output);
  kv["noncomp_output_rows"] = FormatRange(d.layout.noncomp_output);
  std::string sel;
  for (std::size_t i = 0; i < d.selected_features.size(); ++i) {
    if (i) sel += ' ';
    sel += std::to_string(d.selected_features[i]);
  }
  kv["selected_features"] = sel;
  WriteKeyValues(kv, dir / (stem + "_meta.txt"));
}

Dataset ReadDataset(const std::filesystem::path& dir, const std::string& stem) {
  const KeyValues kv = ReadKeyValues(dir / (stem + "_meta.txt"));
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParameterError("dataset meta missing key " + key);
    return it->second;
  };
  Dataset d;
  d.params.n_x = std::stoi(get("n_x"));
  d.params.n_y = std::stoi(get("n_y"));
  d.params.k_x = std::stoi(get("k_x"));
  d.params.k_y = std::stoi(get("k_y"));
  d.params.r = std::stod(get("r"));
  d.params.Validate();
  d.comp_input_present = get("comp_input_present") == "1";
  d.layout.comp_input = ParseRange(get("comp_input_rows"));
  d.layout.noncomp_input = ParseRange(get("noncomp_input_rows"));
  d.layout.comp_output = ParseRange(get("comp_output_rows"));
  d.layout.noncomp_output = ParseRange(get("noncomp_output_rows"));
  std::istringstream sel(get("selected_features"));
  for (int f; sel >> f;) d.selected_features.push_back(f);
  d.input = ReadMatrixCsv(dir / (stem + "_input.csv"));
  d.output = ReadMatrixCsv(dir / (stem + "_output.csv"));
  if (d.input.rows() != d.layout.InputDim() ||
      d.output.rows() != d.layout.OutputDim() ||
      d.input.cols() != d.params.NumPatterns() ||
      d.output.cols() != d.input.cols()) {
    throw ParameterError("dataset csv dimensions disagree with metadata");
  }
  return d;
}

}  // namespace modlin
