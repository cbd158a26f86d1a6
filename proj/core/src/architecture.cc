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

#include "modlin/architecture.h"

#include <numeric>

#include "modlin/errors.h"

namespace modlin {

void Architecture::Validate(const DatasetParams& params) const {
  if (kind != ArchKind::kImperfectPartition) return;
  if (k_y_left < 0 || k_y_right < 0) {
    throw ParameterError("imperfect partition counts must be >= 0");
  }
  if (k_y_left + k_y_right != params.k_y) {
    throw ParameterError("imperfect partition: k_y_left + k_y_right (" +
                         std::to_string(k_y_left + k_y_right) +
                         ") must equal k_y (" + std::to_string(params.k_y) +
                         ")");
  }
}

Depth DefaultDepth(const Architecture& arch) {
  return arch.kind == ArchKind::kShallow ? Depth::kShallow : Depth::kDeep;
}

std::string ToString(const Architecture& arch) {
  switch (arch.kind) {
    case ArchKind::kDense:
      return "dense";
    case ArchKind::kShallow:
      return "shallow";
    case ArchKind::kOutputPartitioned:
      return "output-partitioned";
    case ArchKind::kFullyPartitioned:
      return "fully-partitioned";
    case ArchKind::kImperfectPartition:
      return "imperfect:" + std::to_string(arch.k_y_left) + ":" +
             std::to_string(arch.k_y_right);
  }
  return "?";
}

Architecture ParseArchitecture(const std::string& text) {
  if (text == "dense") return Architecture::Dense();
  if (text == "shallow") return Architecture::Shallow();
  if (text == "output-partitioned") return Architecture::OutputPartitioned();
  if (text == "fully-partitioned") return Architecture::FullyPartitioned();
  if (text.rfind("imperfect:", 0) == 0) {
    const std::string rest = text.substr(10);
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
      try {
        return Architecture::ImperfectPartition(
            std::stoi(rest.substr(0, colon)), std::stoi(rest.substr(colon + 1)));
      } catch (const std::exception&) {
      }
    }
  }
  throw ParameterError(
      "unknown architecture '" + text +
      "' (expected dense, shallow, output-partitioned, fully-partitioned or "
      "imperfect:<left>:<right>)");
}

std::string ToString(Depth depth) {
  return depth == Depth::kShallow ? "shallow" : "deep";
}

Depth ParseDepth(const std::string& text) {
  if (text == "shallow") return Depth::kShallow;
  if (text == "deep") return Depth::kDeep;
  throw ParameterError("unknown depth '" + text + "' (expected shallow|deep)");
}

void Subproblem::Validate() const {
  if (bits < 1 || bits > 12) throw ParameterError("subproblem bits out of range");
  if (k_x < 0 || k_y < 0) throw ParameterError("subproblem counts must be >= 0");
  if ((k_x > 0 || k_y > 0) && !(r > 0.0)) {
    throw ParameterError("subproblem r must be > 0");
  }
  if (!comp_input && !selected.empty()) {
    throw ParameterError(
        "compositional outputs need compositional inputs in a subproblem");
  }
  if (InputDim() == 0) throw ParameterError("subproblem has no inputs");
  std::vector<bool> seen(bits, false);
  for (int f : selected) {
    if (f < 0 || f >= bits || seen[f]) {
      throw ParameterError("subproblem selected features must be distinct bits");
    }
    seen[f] = true;
  }
}

Subproblem WholeProblem(const DatasetParams& params,
                        const std::vector<int>& selected) {
  Subproblem sp;
  sp.bits = params.n_x;
  sp.selected = selected;
  sp.k_x = params.k_x;
  sp.k_y = params.k_y;
  sp.r = params.r;
  return sp;
}

Subproblem WholeProblem(const Dataset& d) {
  Subproblem sp = WholeProblem(d.params, d.selected_features);
  sp.comp_input = d.comp_input_present;
  return sp;
}

std::vector<ModuleSpec> DecomposeModules(const Architecture& arch,
                                         const DatasetParams& params,
                                         const std::vector<int>& selected,
                                         bool comp_input_present) {
  params.Validate();
  arch.Validate(params);
  if (static_cast<int>(selected.size()) != params.n_y) {
    throw ParameterError("selected feature count must equal n_y");
  }
  const int p = params.NumPatterns();
  const int comp_in = comp_input_present ? params.n_x : 0;
  const RowRange all_in{0, comp_in + params.k_x * p};
  const RowRange comp_in_rows{0, comp_in};
  const RowRange noncomp_in_rows{comp_in, all_in.end};
  const RowRange comp_out_rows{0, params.n_y};
  const RowRange noncomp_out_rows{params.n_y, params.n_y + params.k_y * p};

  Subproblem whole = WholeProblem(params, selected);
  whole.comp_input = comp_input_present;

  std::vector<ModuleSpec> modules;
  auto add = [&](std::string name, RowRange in, RowRange out, Subproblem sp) {
    if (in.empty() || out.empty()) return;
    sp.Validate();
    modules.push_back({std::move(name), in, out, std::move(sp)});
  };

  switch (arch.kind) {
    case ArchKind::kDense:
    case ArchKind::kShallow:
      add(arch.kind == ArchKind::kDense ? "dense" : "shallow", all_in,
          {0, noncomp_out_rows.end}, whole);
      break;
    case ArchKind::kOutputPartitioned: {
      Subproblem comp = whole;
      comp.k_y = 0;
      Subproblem noncomp = whole;
      noncomp.selected.clear();
      add("comp", all_in, comp_out_rows, comp);
      add("noncomp", all_in, noncomp_out_rows, noncomp);
      break;
    }
    case ArchKind::kFullyPartitioned: {
      Subproblem comp = whole;
      comp.k_x = 0;
      comp.k_y = 0;
      Subproblem noncomp = whole;
      noncomp.comp_input = false;
      noncomp.selected.clear();
      add("comp", comp_in_rows, comp_out_rows, comp);
      add("noncomp", noncomp_in_rows, noncomp_out_rows, noncomp);
      break;
    }
    case ArchKind::kImperfectPartition: {
      Subproblem left = whole;
      left.k_y = arch.k_y_left;
      Subproblem right = whole;
      right.selected.clear();
      right.k_y = arch.k_y_right;
      add("left", all_in, {0, params.n_y + arch.k_y_left * p}, left);
      add("right", all_in,
          {params.n_y + arch.k_y_left * p, noncomp_out_rows.end}, right);
      break;
    }
  }
  return modules;
}

std::vector<ModuleSpec> DecomposeModules(const Architecture& arch,
                                         const Dataset& dataset) {
  return DecomposeModules(arch, dataset.params, dataset.selected_features,
                          dataset.comp_input_present);
}

void SubproblemMatrices(const Subproblem& sp, Eigen::MatrixXd* x,
                        Eigen::MatrixXd* y) {
  sp.Validate();
  const int p = sp.NumPatterns();
  const Eigen::MatrixXd omega = SignPatterns(sp.bits);
  const Eigen::MatrixXd block = sp.r * Eigen::MatrixXd::Identity(p, p);
  const int nc = sp.CompInputs();
  const int ny = sp.CompOutputs();

  x->setZero(sp.InputDim(), p);
  if (nc > 0) x->topRows(nc) = omega;
  for (int b = 0; b < sp.k_x; ++b) x->middleRows(nc + b * p, p) = block;

  y->setZero(sp.OutputDim(), p);
  for (int s = 0; s < ny; ++s) y->row(s) = omega.row(sp.selected[s]);
  for (int b = 0; b < sp.k_y; ++b) y->middleRows(ny + b * p, p) = block;
}

}  // namespace modlin
