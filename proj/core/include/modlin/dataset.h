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

#ifndef MODLIN_DATASET_H_
#define MODLIN_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace modlin {

// A point in the dataset space. n_x compositional input bits generate all
// 2^n_x sign patterns; n_y of those features are copied to the output; k_x and
// k_y count r-scaled identity blocks appended to input and output.
struct DatasetParams {
  int n_x = 1;
  int n_y = 0;
  int k_x = 0;
  int k_y = 0;
  double r = 1.0;

  int NumPatterns() const { return 1 << n_x; }
  int InputDim() const { return n_x + k_x * NumPatterns(); }
  int OutputDim() const { return n_y + k_y * NumPatterns(); }

  // Throws ParameterError on n_x < 1, n_y > n_x, negative counts, r <= 0 with
  // identity blocks present, or n_x beyond the supported enumeration size.
  void Validate() const;

  friend bool operator==(const DatasetParams&, const DatasetParams&) = default;
};

std::string ToString(const DatasetParams& params);

// Half-open row interval [begin, end).
struct RowRange {
  int begin = 0;
  int end = 0;

  int size() const { return end - begin; }
  bool empty() const { return end <= begin; }
  bool contains(int row) const { return row >= begin && row < end; }

  friend bool operator==(const RowRange&, const RowRange&) = default;
};

struct BlockLayout {
  RowRange comp_input;
  RowRange noncomp_input;
  RowRange comp_output;
  RowRange noncomp_output;

  int InputDim() const { return noncomp_input.end; }
  int OutputDim() const { return noncomp_output.end; }

  friend bool operator==(const BlockLayout&, const BlockLayout&) = default;
};

enum class FeatureChoice { kFirst, kSeededRandom };

// Examples are columns. Rows of `input` are [Omega_x; Gamma_x], rows of
// `output` are [Omega_y; Gamma_y].
struct Dataset {
  Eigen::MatrixXd input;
  Eigen::MatrixXd output;
  BlockLayout layout;
  DatasetParams params;
  std::vector<int> selected_features;
  // False once the compositional input rows have been removed (see
  // StripCompositionalInput); the example count is still 2^n_x.
  bool comp_input_present = true;

  int NumExamples() const { return static_cast<int>(input.cols()); }
};

// Column j holds the binary expansion of j, least significant bit in row 0,
// with bit 0 -> -1 and bit 1 -> +1.
Eigen::MatrixXd SignPatterns(int n_bits);

Dataset BuildDataset(const DatasetParams& params,
                     FeatureChoice choice = FeatureChoice::kFirst,
                     std::uint64_t seed = 0);

// Drops the compositional input rows, leaving an identity-only input over the
// same 2^n_x examples. Used for the pure-memorisation dataset where the
// examples carry no compositional input features.
Dataset StripCompositionalInput(const Dataset& dataset);

struct CovariancePair {
  Eigen::MatrixXd sigma_x;   // E[X X^T]
  Eigen::MatrixXd sigma_yx;  // E[Y X^T]
};

CovariancePair Covariances(const Dataset& dataset);
// Same, restricted to the given example columns (divisor = columns.size()).
CovariancePair Covariances(const Dataset& dataset, std::span<const int> columns);

// E[Y Y^T], optionally over a column subset (empty span = all columns).
Eigen::MatrixXd OutputCovariance(const Dataset& dataset,
                                 std::span<const int> columns = {});

struct ExampleSplit {
  std::vector<int> train;
  std::vector<int> test;
};

// Uniform random subset of n_train columns without replacement; both halves
// are returned sorted.
ExampleSplit SplitExamples(const Dataset& dataset, int n_train,
                           std::uint64_t seed);

// Gathers the listed example columns of a matrix.
Eigen::MatrixXd GatherColumns(const Eigen::MatrixXd& m,
                              std::span<const int> columns);

// CSV serialization: <dir>/<stem>_input.csv, <stem>_output.csv and a
// key=value <stem>_meta.txt.
void WriteDataset(const Dataset& dataset, const std::filesystem::path& dir,
                  const std::string& stem = "dataset");
Dataset ReadDataset(const std::filesystem::path& dir,
                    const std::string& stem = "dataset");

}  // namespace modlin

#endif  // MODLIN_DATASET_H_
