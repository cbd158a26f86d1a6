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

#ifndef MODLIN_METRICS_H_
#define MODLIN_METRICS_H_

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "modlin/analytic.h"
#include "modlin/dataset.h"

namespace modlin {

// Frobenius norms of the four blocks of an input-output map. The first word
// names the input block, the second the output block.
struct NormPartition {
  double comp_comp = 0.0;
  double noncomp_comp = 0.0;
  double comp_noncomp = 0.0;
  double noncomp_noncomp = 0.0;

  // sqrt of the sum of squares, equal to the Frobenius norm of the map.
  double Total() const;
};

// diag(U^T map V). Throws ParameterError on a dimension mismatch.
Eigen::VectorXd EmpiricalModeValues(const Eigen::MatrixXd& map,
                                    const AnalyticSVD& svd);

// Means of EmpiricalModeValues over each present group (1, 2, 3 in order).
std::vector<double> GroupMeans(const Eigen::VectorXd& values,
                               const AnalyticSVD& svd);

NormPartition PartitionedNorms(const Eigen::MatrixXd& map,
                               const BlockLayout& layout);

enum class Verdict { kSystematic, kNonSystematic };

std::string ToString(Verdict verdict);

// Systematic iff both cross norms are below tol while comp_comp exceeds it.
Verdict SystematicityVerdict(const NormPartition& p, double tol);
// 1e-3 relative to comp_comp.
double DefaultVerdictTolerance(const NormPartition& p);

// Named curves on a shared time grid.
struct CurveSet {
  std::vector<double> times;
  std::vector<std::string> ids;
  std::vector<std::vector<double>> values;  // values[curve][time]

  const std::vector<double>& Get(const std::string& id) const;
};

CurveSet ToCurveSet(const NormCurves& norms, const ModeCurves& modes);

struct SeriesDeviation {
  std::string id;
  double max_abs = 0.0;
  double at_time = 0.0;
};

struct DeviationReport {
  std::vector<SeriesDeviation> series;

  double MaxOver(const std::string& prefix) const;
  double MaxModeDeviation() const { return MaxOver("mode_"); }
  double MaxNormDeviation() const { return MaxOver("norm_"); }
};

// Max-abs deviation for every predicted id also present in `simulated`.
// Throws ParameterError if the grids differ or an id is missing.
DeviationReport Deviation(const CurveSet& simulated, const CurveSet& predicted);

void WriteDeviationKeyValues(const DeviationReport& report,
                             const std::filesystem::path& path);
void WriteDeviationCsv(const DeviationReport& report, std::ostream& out);

}  // namespace modlin

#endif  // MODLIN_METRICS_H_
