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

// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status is
// nonzero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <Eigen/Dense>

#include "modlin/analytic.h"
#include "modlin/architecture.h"
#include "modlin/csv.h"
#include "modlin/dataset.h"
#include "modlin/experiment.h"
#include "modlin/linear_net.h"
#include "modlin/metrics.h"
#include "modlin/rank_mc.h"

namespace modlin {
namespace {

namespace fs = std::filesystem;

// Tolerances.
constexpr double kSvdTol = 1e-9;
constexpr double kSpectrumTol = 1e-9;
constexpr double kTrajectoryTol = 5e-2;
constexpr double kAsymptoteTol = 1e-3;
constexpr double kNormTol = 5e-2;
constexpr double kDenseCompCompTol = 1e-2;
constexpr double kCrossNormFloor = 0.1;
constexpr double kSplitCompCompTol = 1e-2;
constexpr double kPi2OnlyTol = 1e-3;
constexpr double kRankTolPoints = 2.5;
constexpr double kGeneralizeLoss = 5e-2;
constexpr double kNoGeneralizeRatio = 0.5;
constexpr double kRuleNormTol = 5e-2;
constexpr double kSvdSeconds = 30.0;
constexpr double kFig3Seconds = 60.0;
constexpr double kRankSeconds = 30.0;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void Check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [x] " << what << ";";
    }
  }
};

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string Num(double v, int precision = 4) { return FormatDouble(v, precision); }

double Last(const RunResult& r, const std::string& id) {
  return r.history.mean.Get(id).back();
}

const RunResult& FindRun(const ExperimentResult& e, const std::string& label) {
  for (const RunResult& r : e.runs) {
    if (r.spec.label == label) return r;
  }
  throw std::runtime_error("no run '" + label + "'");
}

std::vector<DatasetParams> SvdGrid() {
  std::vector<DatasetParams> grid;
  for (int nx = 1; nx <= 4; ++nx) {
    for (int ny = 1; ny <= nx; ++ny) {
      for (int kx = 1; kx <= 3; ++kx) {
        for (int ky = 1; ky <= 3; ++ky) {
          for (double r : {1.0, 2.0}) grid.push_back({nx, ny, kx, ky, r});
        }
      }
    }
  }
  return grid;
}

// 1: closed-form SVD factors reproduce the covariances.
void SvdClosedForm(Outcome* out) {
  const auto start = Clock::now();
  double worst_usv = 0, worst_vdv = 0, worst_u = 0, worst_v = 0;
  const std::vector<DatasetParams> grid = SvdGrid();
  for (const DatasetParams& p : grid) {
    const Dataset d = BuildDataset(p);
    const AnalyticSVD s = ComputeAnalyticSVD(d);
    const CovariancePair cov = Covariances(d);
    const int m = s.NumModes();
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(m, m);
    worst_usv = std::max(
        worst_usv, (s.u_matrix * s.s_matrix * s.v_matrix.transpose() - cov.sigma_yx).norm());
    worst_vdv = std::max(
        worst_vdv, (s.v_matrix * s.d_matrix * s.v_matrix.transpose() - cov.sigma_x).norm());
    worst_u = std::max(worst_u, (s.u_matrix.transpose() * s.u_matrix - eye).norm());
    worst_v = std::max(worst_v, (s.v_matrix.transpose() * s.v_matrix - eye).norm());
  }
  const double secs = Seconds(start);
  out->Check(worst_usv < kSvdTol, "USV^T residual");
  out->Check(worst_vdv < kSvdTol, "VDV^T residual");
  out->Check(worst_u < kSvdTol, "U orthonormality");
  out->Check(worst_v < kSvdTol, "V orthonormality");
  out->Check(secs < kSvdSeconds, "runtime");
  out->detail << " grid=" << grid.size() << " max|USV^T-Syx|=" << Num(worst_usv, 3)
              << " max|VDV^T-Sx|=" << Num(worst_vdv, 3) << " max|U^TU-I|="
              << Num(worst_u, 3) << " max|V^TV-I|=" << Num(worst_v, 3)
              << " time=" << Num(secs, 3) << "s";
}

// 2: distinct singular values and multiplicities against a numerical SVD.
void SpectrumVsNumerical(Outcome* out) {
  double worst = 0;
  int count_mismatch = 0, sum_mismatch = 0;
  for (const DatasetParams& p : SvdGrid()) {
    const Dataset d = BuildDataset(p);
    const Eigen::MatrixXd syx = Covariances(d).sigma_yx;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(syx);
    std::vector<double> sv(svd.singularValues().data(),
                           svd.singularValues().data() + svd.singularValues().size());
    const ModeSpectrum s = ComputeModeSpectrum(p);
    int total = 0;
    for (int g = 1; g <= 3; ++g) {
      const int mult = s.Multiplicity(g);
      total += mult;
      if (mult == 0) continue;
      int found = 0;
      double closest = 1e300;
      for (double v : sv) {
        closest = std::min(closest, std::abs(v - s.Lambda(g)));
        if (std::abs(v - s.Lambda(g)) < 1e-7) ++found;
      }
      worst = std::max(worst, closest);
      if (found != mult) ++count_mismatch;
    }
    int nonzero = 0;
    for (double v : sv) nonzero += v > 1e-9;
    if (total != p.NumPatterns() || nonzero != total) ++sum_mismatch;
  }
  out->Check(worst < kSpectrumTol, "distinct values");
  out->Check(count_mismatch == 0, "per-group multiplicities");
  out->Check(sum_mismatch == 0, "multiplicities sum to 2^n_x");
  out->detail << " max|lambda-numerical|=" << Num(worst, 3)
              << " multiplicity mismatches=" << count_mismatch
              << " sum mismatches=" << sum_mismatch;
}

double Pi1() { return std::sqrt(99.0) / 8 / 1.375; }
double Pi2() { return std::sqrt(11.0) / 8 / 1.375; }
double Pi3() { return std::sqrt(3.0) / 8 / 0.375; }

// 3: fig3 mode trajectories.
void Fig3Modes(Outcome* out) {
  const auto start = Clock::now();
  const ExperimentResult e = RunExperiment(Preset("fig3"));
  const double secs = Seconds(start);
  const double want[3] = {Pi1(), Pi2(), Pi3()};
  for (const char* label : {"deep", "shallow"}) {
    const RunResult& r = FindRun(e, label);
    const double dev = r.deviation->MaxModeDeviation();
    out->Check(dev < kTrajectoryTol, std::string(label) + " trajectory deviation");
    out->detail << " " << label << ": max mode dev=" << Num(dev, 3) << " final=(";
    for (int k = 0; k < 3; ++k) {
      const double v = Last(r, "mode_" + std::to_string(k + 1));
      out->Check(std::abs(v - want[k]) < kAsymptoteTol,
                 std::string(label) + " mode_" + std::to_string(k + 1) + " asymptote");
      out->detail << (k ? "," : "") << Num(v, 5);
    }
    out->detail << ")";
  }
  out->Check(secs < kFig3Seconds, "runtime");
  out->detail << " target=(" << Num(want[0], 5) << "," << Num(want[1], 5) << ","
              << Num(want[2], 5) << ") time=" << Num(secs, 3) << "s";
}

// 4: partitioned norm trajectories.
void NormTrajectories(Outcome* out) {
  ExperimentConfig c = Preset("fig3");
  const ExperimentConfig split = Preset("fig5-split");
  c.runs.insert(c.runs.end(), split.runs.begin(), split.runs.end());
  const ExperimentResult e = RunExperiment(c);
  for (const RunResult& r : e.runs) {
    const double dev = r.deviation->MaxNormDeviation();
    out->Check(dev < kNormTol, r.spec.label + " norm deviation");
    out->detail << " " << r.spec.label << "=" << Num(dev, 3);
  }
  const double cc = Last(FindRun(e, "deep"), "norm_comp_comp");
  out->Check(std::abs(cc - 8.0 / 11) < kDenseCompCompTol, "dense comp_comp limit");
  out->detail << " dense comp_comp=" << Num(cc, 5) << " (8/11=" << Num(8.0 / 11, 5)
              << ")";
}

TrainingHistory TrainRun(const RunSpec& spec, std::uint64_t seed) {
  const Dataset d = BuildDataset(spec.params);
  TrainConfig cfg = spec.train;
  cfg.seed = seed;
  return Train(InitNetwork(d, spec.arch, spec.depth, cfg), d, spec.rule, cfg);
}

// 5: qualitative observations as assertions.
void Observations(Outcome* out) {
  const ExperimentConfig fig3 = Preset("fig3");
  const ExperimentConfig split = Preset("fig5-split");

  // Dense: both cross blocks are used.
  {
    const TrainingHistory h = TrainRun(fig3.runs[0], 1);
    const NormPartition& n = h.records.back().norms;
    out->Check(n.noncomp_comp > kCrossNormFloor && n.comp_noncomp > kCrossNormFloor,
               "dense cross norms");
    out->detail << " dense cross=(" << Num(n.noncomp_comp) << "," << Num(n.comp_noncomp)
                << ")";
  }
  // Output-partitioned: the comp->noncomp block is carried by the group-2
  // modes of the noncomp module alone, and the comp module reads the identity
  // inputs.
  {
    const RunSpec& spec = split.runs[0];
    const TrainingHistory h = TrainRun(spec, 1);
    const NormPartition& n = h.records.back().norms;
    out->Check(n.noncomp_comp > kCrossNormFloor, "output-partitioned noncomp_comp");
    double residual = -1, raw_residual = -1;
    for (const ModuleWeights& m : h.final_state.modules) {
      if (m.spec.name != "noncomp") continue;
      const AnalyticSVD svd = ComputeAnalyticSVD(m.spec.problem);
      const Eigen::MatrixXd map = m.Map();
      const Eigen::VectorXd pi = EmpiricalModeValues(map, svd);
      Eigen::MatrixXd only2 = Eigen::MatrixXd::Zero(map.rows(), map.cols());
      for (int a = 0; a < svd.NumModes(); ++a) {
        if (svd.mode_group[a] == 2) {
          only2 += pi(a) * svd.u_matrix.col(a) * svd.v_matrix.col(a).transpose();
        }
      }
      // Directions outside the input span never receive a gradient; compare
      // the map as seen by the data.
      const Eigen::MatrixXd on_span = map * svd.v_matrix * svd.v_matrix.transpose();
      const int comp_in = m.spec.problem.CompInputs();
      residual = (on_span.leftCols(comp_in) - only2.leftCols(comp_in)).norm();
      raw_residual = (map.leftCols(comp_in) - only2.leftCols(comp_in)).norm();
      // The closed form for this block ignores the other groups.
      const BlockNormSquares base = ModuleNormSquares(m.spec.problem, 0.3, 0.4, 0.5);
      const BlockNormSquares moved = ModuleNormSquares(m.spec.problem, 0.9, 0.4, 0.1);
      out->Check(base.comp_noncomp == moved.comp_noncomp,
                 "closed-form comp_noncomp depends on pi2 only");
    }
    out->Check(residual >= 0 && residual < kPi2OnlyTol,
               "output-partitioned comp_noncomp from group-2 modes");
    out->detail << " output-partitioned noncomp_comp=" << Num(n.noncomp_comp)
                << " |comp_noncomp - pi2 part|=" << Num(residual, 3)
                << " (off-span init " << Num(raw_residual, 3) << ")";
  }
  // Fully partitioned: no cross talk at any epoch, comp_comp -> sqrt(n_y).
  {
    const RunSpec& spec = split.runs[1];
    const TrainingHistory h = TrainRun(spec, 1);
    double worst_cross = 0;
    for (const HistoryRecord& r : h.records) {
      worst_cross = std::max({worst_cross, r.norms.noncomp_comp, r.norms.comp_noncomp});
    }
    const double cc = h.records.back().norms.comp_comp;
    const double want = std::sqrt(static_cast<double>(spec.params.n_y));
    out->Check(worst_cross == 0.0, "fully-partitioned cross norms exactly zero");
    out->Check(std::abs(cc - want) < kSplitCompCompTol, "fully-partitioned comp_comp");
    out->Check(SystematicityVerdict(h.records.back().norms,
                                    DefaultVerdictTolerance(h.records.back().norms)) ==
                   Verdict::kSystematic,
               "fully-partitioned verdict");
    out->detail << " fully-partitioned max cross=" << Num(worst_cross, 3)
                << " comp_comp=" << Num(cc, 5);
  }
  // Imperfect partitions with identity outputs on the compositional side.
  {
    const ExperimentConfig g = Preset("appendixG-sweep");
    for (const RunSpec& spec : g.runs) {
      if (spec.arch.k_y_left < 1) continue;
      const TrainingHistory h = TrainRun(spec, 1);
      const NormPartition& n = h.records.back().norms;
      const Verdict v = SystematicityVerdict(n, DefaultVerdictTolerance(n));
      out->Check(v == Verdict::kNonSystematic, spec.label + " verdict");
      out->detail << " " << spec.label << "=" << ToString(v);
    }
  }
}

// 6: full-rank sample probabilities.
void RankTables(Outcome* out) {
  const auto start = Clock::now();
  const ExperimentConfig c = Preset("rank-tables");
  const ExperimentResult e = RunExperiment(c);
  const double secs = Seconds(start);
  struct Ref {
    int n, size;
    double percent;
  };
  const Ref refs[] = {{3, 3, 57.5},  {3, 4, 91.9},  {3, 5, 100},   {3, 6, 100},
                      {3, 7, 100},   {3, 8, 100},   {4, 4, 29.74}, {4, 5, 84.76},
                      {4, 6, 93.82}, {4, 7, 99.2},  {4, 8, 99.72}};
  for (const Ref& ref : refs) {
    double est = -1;
    for (const auto& table : e.rank_tables) {
      for (const RankRow& row : table) {
        if (row.n_features == ref.n && row.sample_size == ref.size) est = row.estimate;
      }
    }
    const double gap = std::abs(100 * est - ref.percent);
    const std::string name =
        "n=" + std::to_string(ref.n) + " size=" + std::to_string(ref.size);
    out->Check(gap <= kRankTolPoints, name + " (" + Num(100 * est) + "% vs " +
                                          Num(ref.percent) + "%)");
    out->detail << " " << name << ":" << Num(100 * est) << "%";
  }
  for (const auto& table : e.rank_tables) {
    for (const RankRow& row : table) {
      if (row.n_features == 4 && row.sample_size >= 9) {
        out->Check(row.estimate == 1.0, "n=4 size>=9 is always full rank");
      }
    }
  }
  const double exact = EnumerateFullRankProbability(3, 3);
  out->Check(std::abs(exact - 32.0 / 56) < 1e-15, "enumeration 32/56");
  out->Check(secs < kRankSeconds, "runtime");
  out->detail << " exact(3,3)=" << Num(exact, 6) << " time=" << Num(secs, 3) << "s";
}

// 7: generalization from three training examples.
void Generalization(Outcome* out) {
  for (const char* letter : {"A", "B", "C"}) {
    const ExperimentResult e = RunExperiment(Preset(std::string("appendixA-dataset") + letter));
    const RunResult& r = e.runs.front();
    const std::vector<double>& test = r.history.mean.Get("test_loss");
    const std::vector<double>& train = r.history.mean.Get("loss");
    const double ratio = test.back() / test.front();
    const double train_ratio = train.back() / train.front();
    out->Check(train_ratio < 1e-3, std::string(letter) + " training loss converged");
    if (std::string(letter) == "A") {
      out->Check(test.back() < kGeneralizeLoss, "A test loss");
    } else {
      out->Check(ratio > kNoGeneralizeRatio, std::string(letter) + " test loss retained");
    }
    out->detail << " " << letter << ": test " << Num(test.front()) << "->"
                << Num(test.back(), 3) << " (ratio " << Num(ratio, 3) << ", train ratio "
                << Num(train_ratio, 3) << ")";
  }
}

// 8: alternative learning rules reach the gradient-descent norms.
void LearningRules(Outcome* out) {
  const ExperimentResult e = RunExperiment(Preset("appendixH"));
  const RunResult& gd = FindRun(e, "gd");
  const char* ids[] = {"norm_comp_comp", "norm_noncomp_comp", "norm_comp_noncomp",
                       "norm_noncomp_noncomp"};
  for (const RunResult& r : e.runs) {
    if (r.spec.label == "gd") continue;
    double worst = 0;
    for (const char* id : ids) worst = std::max(worst, std::abs(Last(r, id) - Last(gd, id)));
    out->Check(worst < kRuleNormTol, r.spec.label);
    out->detail << " " << r.spec.label << "=" << Num(worst, 3);
  }
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 9: reruns with the same seed are byte-identical.
void Determinism(Outcome* out) {
  const fs::path root = fs::temp_directory_path() / "modlin_acceptance_determinism";
  int compared = 0;
  for (const PresetInfo& p : ListPresets()) {
    ExperimentConfig c = Preset(p.name);
    fs::remove_all(root);
    c.threads = 1;
    WriteBundle(RunExperiment(c), root / "a");
    c.threads = 0;
    WriteBundle(RunExperiment(c), root / "b");
    int differing = 0;
    for (const auto& entry : fs::directory_iterator(root / "a")) {
      ++compared;
      const fs::path other = root / "b" / entry.path().filename();
      if (!fs::exists(other) || Slurp(entry.path()) != Slurp(other)) ++differing;
    }
    out->Check(differing == 0, p.name + " differs in " + std::to_string(differing) +
                                   " files");
  }
  fs::remove_all(root);
  out->detail << " presets=" << ListPresets().size() << " files compared=" << compared;
}

struct Criterion {
  int id;
  const char* name;
  std::function<void(Outcome*)> run;
};

}  // namespace
}  // namespace modlin

int main(int argc, char** argv) {
  using modlin::Criterion;
  using modlin::Outcome;
  CLI::App app{"Acceptance checks"};
  std::vector<int> only;
  app.add_option("--only", only, "criterion numbers to run (default: all)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "closed-form SVD", modlin::SvdClosedForm},
      {2, "spectrum vs numerical SVD", modlin::SpectrumVsNumerical},
      {3, "fig3 mode trajectories", modlin::Fig3Modes},
      {4, "partitioned norm trajectories", modlin::NormTrajectories},
      {5, "observations", modlin::Observations},
      {6, "rank tables", modlin::RankTables},
      {7, "generalization suite", modlin::Generalization},
      {8, "learning rules", modlin::LearningRules},
      {9, "determinism", modlin::Determinism},
  };
  bool all_pass = true;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) {
      continue;
    }
    Outcome out;
    try {
      c.run(&out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << " error: " << e.what();
    }
    all_pass = all_pass && out.pass;
    std::cout << "criterion " << c.id << " (" << c.name << "): "
              << (out.pass ? "PASS" : "FAIL") << " |" << out.detail.str() << std::endl;
  }
  return all_pass ? 0 : 1;
}
