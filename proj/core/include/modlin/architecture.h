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

#ifndef MODLIN_ARCHITECTURE_H_
#define MODLIN_ARCHITECTURE_H_

#include <string>
#include <vector>

#include "modlin/dataset.h"

namespace modlin {

enum class ArchKind {
  kDense,
  kShallow,
  kOutputPartitioned,
  kFullyPartitioned,
  kImperfectPartition,
};

// How hidden layers connect input and output blocks.
//   Dense: one module, all inputs -> all outputs.
//   Shallow: a single weight matrix, no hidden layer.
//   OutputPartitioned: both modules see every input; one drives Omega_y, the
//     other Gamma_y.
//   FullyPartitioned: Omega_x -> Omega_y and Gamma_x -> Gamma_y.
//   ImperfectPartition: the left module drives Omega_y plus the first
//     k_y_left identity blocks, the right module the remaining k_y_right.
struct Architecture {
  ArchKind kind = ArchKind::kDense;
  int k_y_left = 0;
  int k_y_right = 0;

  static Architecture Dense() { return {ArchKind::kDense}; }
  static Architecture Shallow() { return {ArchKind::kShallow}; }
  static Architecture OutputPartitioned() {
    return {ArchKind::kOutputPartitioned};
  }
  static Architecture FullyPartitioned() {
    return {ArchKind::kFullyPartitioned};
  }
  static Architecture ImperfectPartition(int left, int right) {
    return {ArchKind::kImperfectPartition, left, right};
  }

  // Throws ParameterError if the partition counts do not fit the dataset.
  void Validate(const DatasetParams& params) const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

enum class Depth { kShallow, kDeep };

// Shallow for Architecture::Shallow(), deep for everything else.
Depth DefaultDepth(const Architecture& arch);

std::string ToString(const Architecture& arch);
// Accepts dense, shallow, output-partitioned, fully-partitioned and
// imperfect:<left>:<right>.
Architecture ParseArchitecture(const std::string& text);
std::string ToString(Depth depth);
Depth ParseDepth(const std::string& text);

// The effective dataset a module learns on. Its examples are the 2^bits sign
// patterns; `selected` lists the compositional input features copied to its
// compositional outputs.
struct Subproblem {
  int bits = 1;
  bool comp_input = true;
  std::vector<int> selected;
  int k_x = 0;
  int k_y = 0;
  double r = 1.0;

  int NumPatterns() const { return 1 << bits; }
  int CompInputs() const { return comp_input ? bits : 0; }
  int CompOutputs() const { return static_cast<int>(selected.size()); }
  int InputDim() const { return CompInputs() + k_x * NumPatterns(); }
  int OutputDim() const { return CompOutputs() + k_y * NumPatterns(); }

  void Validate() const;
};

Subproblem WholeProblem(const DatasetParams& params,
                        const std::vector<int>& selected);
Subproblem WholeProblem(const Dataset& dataset);

// Input rows -> output rows of one module, and the effective dataset those
// rows form.
struct ModuleSpec {
  std::string name;
  RowRange inputs;
  RowRange outputs;
  Subproblem problem;
};

// Splits an architecture into its modules. Modules that would own no input
// rows or no output rows are omitted (their outputs stay identically zero).
std::vector<ModuleSpec> DecomposeModules(const Architecture& arch,
                                         const DatasetParams& params,
                                         const std::vector<int>& selected,
                                         bool comp_input_present = true);
std::vector<ModuleSpec> DecomposeModules(const Architecture& arch,
                                         const Dataset& dataset);

// Builds X (inputs x examples) and Y (outputs x examples) for a subproblem.
void SubproblemMatrices(const Subproblem& sp, Eigen::MatrixXd* x,
                        Eigen::MatrixXd* y);

}  // namespace modlin

#endif  // MODLIN_ARCHITECTURE_H_
