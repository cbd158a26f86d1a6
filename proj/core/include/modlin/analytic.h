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

#ifndef MODLIN_ANALYTIC_H_
#define MODLIN_ANALYTIC_H_

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "modlin/architecture.h"
#include "modlin/dataset.h"

namespace modlin {

// Distinct singular values of Sigma_yx, eigenvalues of Sigma_x, and the
// asymptotes lambda / delta. Group 1 holds the selected compositional
// features, group 2 the unselected ones and group 3 the identity modes left
// after projecting out the compositional directions.
struct ModeSpectrum {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double pi1_star = 0.0;
  double pi2_star = 0.0;
  double pi3_star = 0.0;
  bool pi3_defined = false;  // false when delta2 == 0 (no identity inputs)
  int mult1 = 0;
  int mult2 = 0;
  int mult3 = 0;

  // Accessors by group index 1..3.
  double Lambda(int group) const;
  double Delta(int group) const;
  double PiStar(int group) const;
  int Multiplicity(int group) const;
  int Rank() const { return mult1 + mult2 + mult3; }
};

ModeSpectrum ComputeModeSpectrum(const DatasetParams& params);
ModeSpectrum ComputeModeSpectrum(const Subproblem& sp);

struct TrajectoryConfig {
  double pi0 = 1e-3;
  double tau = 1.0;
  double epsilon = 1.0;

  // tau = 1 / (num_examples * epsilon); epsilon == 0 gives tau = +inf, a
  // frozen trajectory.
  static TrajectoryConfig FromLearningRate(double epsilon, int num_examples,
                                           double pi0);
  void Validate() const;
};

// Deep trajectory from small initial strength pi0. lambda == 0 decays to 0.
double DeepModeValue(double lambda, double delta, const TrajectoryConfig& cfg,
                     double t);
// Shallow trajectory: exponential relaxation to lambda / delta.
double ShallowModeValue(double lambda, double delta,
                        const TrajectoryConfig& cfg, double t);
double ModeValue(Depth depth, double lambda, double delta,
                 const TrajectoryConfig& cfg, double t);

// Closed-form SVD of Sigma_yx = U S V^T and Sigma_x = V D V^T. Columns are
// modes: the CompInputs() feature modes first, then one identity mode per
// retained column of p_mat. A mode whose output direction does not exist
// (k_y == 0) has a zero column in U, a zero singular value and group 0.
struct AnalyticSVD {
  Eigen::MatrixXd u_matrix;
  Eigen::MatrixXd s_matrix;
  Eigen::MatrixXd v_matrix;
  Eigen::MatrixXd d_matrix;
  Eigen::MatrixXd a_mat;  // (Oy Ox^T)^T (Oy Ox^T)
  Eigen::MatrixXd b_mat;  // Oy^T Oy Ox^T
  Eigen::MatrixXd c_mat;  // Ox^T Ox Ox^T
  Eigen::MatrixXd t_mat;
  Eigen::MatrixXd h_mat;
  Eigen::MatrixXd p_mat;
  std::vector<int> mode_group;

  int NumModes() const { return static_cast<int>(mode_group.size()); }
  Eigen::VectorXd SingularValues() const { return s_matrix.diagonal(); }
  Eigen::VectorXd Eigenvalues() const { return d_matrix.diagonal(); }
};

// Throws ConsistencyError if the assembled factors miss the covariances by
// more than 1e-6.
AnalyticSVD ComputeAnalyticSVD(const Subproblem& sp);
AnalyticSVD ComputeAnalyticSVD(const Dataset& dataset);

// Squared block norms of a module map whose modes sit at the given mean
// squared strengths per group.
struct BlockNormSquares {
  double comp_comp = 0.0;
  double noncomp_comp = 0.0;
  double comp_noncomp = 0.0;
  double noncomp_noncomp = 0.0;
};
BlockNormSquares ModuleNormSquares(const Subproblem& sp, double pi1_sq,
                                   double pi2_sq, double pi3_sq);

struct NormCurves {
  std::vector<double> times;
  std::vector<double> comp_comp;
  std::vector<double> noncomp_comp;
  std::vector<double> comp_noncomp;
  std::vector<double> noncomp_noncomp;
};

// One tracked mode group of one module, in the order used by histories.
struct ModeDescriptor {
  std::string id;  // mode_1, mode_2, ...
  std::string module;
  int group = 0;
  int multiplicity = 0;
  double lambda = 0.0;
  double delta = 0.0;
  double pi_star = 0.0;
};

struct ModeCurves {
  std::vector<ModeDescriptor> modes;
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // values[mode][time]
};

std::vector<ModeDescriptor> DescribeModes(const std::vector<ModuleSpec>& modules);

// Initial strengths per module and analytic mode (AnalyticSVD column order).
// Empty means "use cfg.pi0 everywhere".
using ModeInit = std::vector<Eigen::VectorXd>;

NormCurves PredictedNorms(const DatasetParams& params, const Architecture& arch,
                          const TrajectoryConfig& cfg,
                          std::span<const double> times);
NormCurves PredictedNorms(const std::vector<ModuleSpec>& modules, Depth depth,
                          const TrajectoryConfig& cfg, const ModeInit& init,
                          std::span<const double> times);

// Group-mean predicted strengths, one curve per DescribeModes entry.
ModeCurves PredictedModes(const std::vector<ModuleSpec>& modules, Depth depth,
                          const TrajectoryConfig& cfg, const ModeInit& init,
                          std::span<const double> times);

// Probability that sample_size distinct 3-bit sign patterns span R^3, from
// the opposite-pair structure of the cube.
double ExactRankProbability3Features(int sample_size);

// Long format: t,id,value.
void WriteCurvesCsv(std::ostream& out, const NormCurves& norms,
                    const ModeCurves& modes);

}  // namespace modlin

#endif  // MODLIN_ANALYTIC_H_
