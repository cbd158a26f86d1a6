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

#include "modlin/metrics.h"

#include <algorithm>
#include <cmath>

#include "modlin/csv.h"
#include "modlin/errors.h"

namespace modlin {

double NormPartition::Total() const {
  return std::sqrt(comp_comp * comp_comp + noncomp_comp * noncomp_comp +
                   comp_noncomp * comp_noncomp +
                   noncomp_noncomp * noncomp_noncomp);
}

Eigen::VectorXd EmpiricalModeValues(const Eigen::MatrixXd& map,
                                    const AnalyticSVD& svd) {
  if (map.rows() != svd.u_matrix.rows() || map.cols() != svd.v_matrix.rows()) {
    throw ParameterError("map is " + std::to_string(map.rows()) + "x" +
                         std::to_string(map.cols()) + " but the SVD expects " +
                         std::to_string(svd.u_matrix.rows()) + "x" +
                         std::to_string(svd.v_matrix.rows()));
  }
  return (svd.u_matrix.transpose() * map * svd.v_matrix).diagonal();
}

std::vector<double> GroupMeans(const Eigen::VectorXd& values,
                               const AnalyticSVD& svd) {
  double sum[4] = {0, 0, 0, 0};
  int count[4] = {0, 0, 0, 0};
  for (int a = 0; a < svd.NumModes(); ++a) {
    sum[svd.mode_group[a]] += values[a];
    ++count[svd.mode_group[a]];
  }
  std::vector<double> out;
  for (int g = 1; g <= 3; ++g) {
    if (count[g] > 0) out.push_back(sum[g] / count[g]);
  }
  return out;
}

NormPartition PartitionedNorms(const Eigen::MatrixXd& map,
                               const BlockLayout& layout) {
  if (map.rows() != layout.OutputDim() || map.cols() != layout.InputDim()) {
    throw ParameterError("map dimensions do not match the block layout");
  }
  auto block = [&](const RowRange& in, const RowRange& out) {
    if (in.empty() || out.empty()) return 0.0;
    return map.block(out.begin, in.begin, out.size(), in.size()).norm();
  };
  NormPartition p;
  p.comp_comp = block(layout.comp_input, layout.comp_output);
  p.noncomp_comp = block(layout.noncomp_input, layout.comp_output);
  p.comp_noncomp = block(layout.comp_input, layout.noncomp_output);
  p.noncomp_noncomp = block(layout.noncomp_input, layout.noncomp_output);
  return p;
}

std::string ToString(Verdict verdict) {
  return verdict == Verdict::kSystematic ? "systematic" : "non-systematic";
}

Verdict SystematicityVerdict(const NormPartition& p, double tol) {
  if (!(tol > 0.0)) throw ParameterError("verdict tolerance must be > 0");
  const bool systematic =
      p.noncomp_comp < tol && p.comp_noncomp < tol && p.comp_comp > tol;
  return systematic ? Verdict::kSystematic : Verdict::kNonSystematic;
}

double DefaultVerdictTolerance(const NormPartition& p) {
  return 1e-3 * p.comp_comp;
}

const std::vector<double>& CurveSet::Get(const std::string& id) const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return values[i];
  }
  throw ParameterError("missing curve '" + id + "'");
}

CurveSet ToCurveSet(const NormCurves& norms, const ModeCurves& modes) {
  CurveSet set;
  set.times = norms.times;
  set.ids = {"norm_comp_comp", "norm_noncomp_comp", "norm_comp_noncomp",
             "norm_noncomp_noncomp"};
  set.values = {norms.comp_comp, norms.noncomp_comp, norms.comp_noncomp,
                norms.noncomp_noncomp};
  if (!modes.modes.empty() && modes.times != norms.times) {
    throw ParameterError("norm and mode curves use different time grids");
  }
  for (std::size_t m = 0; m < modes.modes.size(); ++m) {
    set.ids.push_back(modes.modes[m].id);
    set.values.push_back(modes.values[m]);
  }
  return set;
}

double DeviationReport::MaxOver(const std::string& prefix) const {
  double worst = 0.0;
  for (const SeriesDeviation& s : series) {
    if (s.id.rfind(prefix, 0) == 0) worst = std::max(worst, s.max_abs);
  }
  return worst;
}

DeviationReport Deviation(const CurveSet& simulated,
                          const CurveSet& predicted) {
  if (simulated.times.size() != predicted.times.size()) {
    throw ParameterError("deviation: time grids differ in length");
  }
  for (std::size_t i = 0; i < simulated.times.size(); ++i) {
    if (std::abs(simulated.times[i] - predicted.times[i]) > 1e-9) {
      throw ParameterError("deviation: time grids differ at index " +
                           std::to_string(i));
    }
  }
  DeviationReport report;
  for (std::size_t c = 0; c < predicted.ids.size(); ++c) {
    const std::vector<double>& sim = simulated.Get(predicted.ids[c]);
    const std::vector<double>& pred = predicted.values[c];
    SeriesDeviation d{predicted.ids[c], 0.0, predicted.times.empty()
                                                 ? 0.0
                                                 : predicted.times.front()};
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double dev = std::abs(sim[i] - pred[i]);
      if (dev > d.max_abs || std::isnan(dev)) {
        d.max_abs = dev;
        d.at_time = predicted.times[i];
      }
    }
    report.series.push_back(d);
  }
  return report;
}

void WriteDeviationKeyValues(const DeviationReport& report,
                             const std::filesystem::path& path) {
  KeyValues kv;
  kv["max_mode_deviation"] = FormatDouble(report.MaxModeDeviation());
  kv["max_norm_deviation"] = FormatDouble(report.MaxNormDeviation());
  for (const SeriesDeviation& s : report.series) {
    kv["max_abs." + s.id] = FormatDouble(s.max_abs);
    kv["at_epoch." + s.id] = FormatDouble(s.at_time);
  }
  WriteKeyValues(kv, path);
}

void WriteDeviationCsv(const DeviationReport& report, std::ostream& out) {
  CsvWriter csv(out, {"id", "max_abs_deviation", "epoch"});
  for (const SeriesDeviation& s : report.series) {
    csv.Row({s.id, FormatDouble(s.max_abs), FormatDouble(s.at_time)});
  }
}

}  // namespace modlin
