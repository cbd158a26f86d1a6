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

#include "modlin/analytic.h"

#include <cmath>
#include <limits>

#include "modlin/csv.h"
#include "modlin/errors.h"

namespace modlin {
namespace {

constexpr double kReconstructionLimit = 1e-6;
constexpr double kRankTolerance = 1e-9;

double Binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double result = 1.0;
  for (int i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return result;
}

struct GroupMoments {
  double mean[4] = {0, 0, 0, 0};     // mean strength per group
  double mean_sq[4] = {0, 0, 0, 0};  // mean squared strength per group
};

struct ModuleModel {
  const ModuleSpec* spec;
  ModeSpectrum spectrum;
  std::vector<int> groups;  // per analytic mode, only set with per-mode init
  Eigen::VectorXd pi0;
};

std::vector<ModuleModel> BuildModels(const std::vector<ModuleSpec>& modules,
                                     const ModeInit& init) {
  if (!init.empty() && init.size() != modules.size()) {
    throw ParameterError("per-mode init needs one vector per module");
  }
  std::vector<ModuleModel> models;
  for (std::size_t m = 0; m < modules.size(); ++m) {
    ModuleModel model{&modules[m], ComputeModeSpectrum(modules[m].problem), {},
                      {}};
    if (!init.empty()) {
      model.groups = ComputeAnalyticSVD(modules[m].problem).mode_group;
      model.pi0 = init[m];
      if (model.pi0.size() != static_cast<Eigen::Index>(model.groups.size())) {
        throw ParameterError("per-mode init for module '" + modules[m].name +
                             "' has the wrong length");
      }
    }
    models.push_back(std::move(model));
  }
  return models;
}

GroupMoments Moments(const ModuleModel& model, Depth depth,
                     const TrajectoryConfig& cfg, double t) {
  GroupMoments out;
  const ModeSpectrum& s = model.spectrum;
  if (model.groups.empty()) {
    for (int g = 1; g <= 3; ++g) {
      if (s.Multiplicity(g) == 0) continue;
      const double v = ModeValue(depth, s.Lambda(g), s.Delta(g), cfg, t);
      out.mean[g] = v;
      out.mean_sq[g] = v * v;
    }
    return out;
  }
  int count[4] = {0, 0, 0, 0};
  TrajectoryConfig mode_cfg = cfg;
  for (std::size_t a = 0; a < model.groups.size(); ++a) {
    const int g = model.groups[a];
    if (g == 0) continue;
    mode_cfg.pi0 = model.pi0[a];
    const double v = ModeValue(depth, s.Lambda(g), s.Delta(g), mode_cfg, t);
    out.mean[g] += v;
    out.mean_sq[g] += v * v;
    ++count[g];
  }
  for (int g = 1; g <= 3; ++g) {
    if (count[g] == 0) continue;
    out.mean[g] /= count[g];
    out.mean_sq[g] /= count[g];
  }
  return out;
}

}  // namespace

double ModeSpectrum::Lambda(int group) const {
  switch (group) {
    case 1: return lambda1;
    case 2: return lambda2;
    case 3: return lambda3;
  }
  throw ParameterError("mode group must be 1, 2 or 3");
}

double ModeSpectrum::Delta(int group) const {
  switch (group) {
    case 1:
    case 2: return delta1;
    case 3: return delta2;
  }
  throw ParameterError("mode group must be 1, 2 or 3");
}

double ModeSpectrum::PiStar(int group) const {
  switch (group) {
    case 1: return pi1_star;
    case 2: return pi2_star;
    case 3: return pi3_star;
  }
  throw ParameterError("mode group must be 1, 2 or 3");
}

int ModeSpectrum::Multiplicity(int group) const {
  switch (group) {
    case 1: return mult1;
    case 2: return mult2;
    case 3: return mult3;
  }
  throw ParameterError("mode group must be 1, 2 or 3");
}

ModeSpectrum ComputeModeSpectrum(const Subproblem& sp) {
  sp.Validate();
  const double p = sp.NumPatterns();
  const double kx = sp.k_x, ky = sp.k_y, r2 = sp.r * sp.r;
  const int nc = sp.CompInputs();
  const int ny = sp.CompOutputs();

  ModeSpectrum s;
  s.lambda1 = std::sqrt((kx * r2 + p) * (ky * r2 + p)) / p;
  s.lambda2 = std::sqrt((kx * r2 + p) * ky * r2) / p;
  s.lambda3 = std::sqrt(kx * ky) * r2 / p;
  s.delta1 = (kx * r2 + p) / p;
  s.delta2 = kx * r2 / p;
  s.pi1_star = s.lambda1 / s.delta1;
  s.pi2_star = s.lambda2 / s.delta1;
  s.pi3_defined = s.delta2 > 0.0;
  s.pi3_star = s.pi3_defined ? s.lambda3 / s.delta2 : 0.0;
  s.mult1 = ny;
  s.mult2 = sp.k_y > 0 ? nc - ny : 0;
  s.mult3 = sp.k_x > 0 && sp.k_y > 0 ? sp.NumPatterns() - nc : 0;
  return s;
}

ModeSpectrum ComputeModeSpectrum(const DatasetParams& params) {
  params.Validate();
  std::vector<int> selected(params.n_y);
  for (int i = 0; i < params.n_y; ++i) selected[i] = i;
  return ComputeModeSpectrum(WholeProblem(params, selected));
}

TrajectoryConfig TrajectoryConfig::FromLearningRate(double epsilon,
                                                    int num_examples,
                                                    double pi0) {
  if (epsilon < 0.0 || num_examples < 1) {
    throw ParameterError("learning rate must be >= 0 and examples >= 1");
  }
  TrajectoryConfig cfg;
  cfg.pi0 = pi0;
  cfg.epsilon = epsilon;
  cfg.tau = epsilon > 0.0 ? 1.0 / (num_examples * epsilon)
                          : std::numeric_limits<double>::infinity();
  cfg.Validate();
  return cfg;
}

void TrajectoryConfig::Validate() const {
  if (!(pi0 > 0.0)) throw ParameterError("trajectory pi0 must be > 0");
  if (!(tau > 0.0)) throw ParameterError("trajectory tau must be > 0");
}

double DeepModeValue(double lambda, double delta, const TrajectoryConfig& cfg,
                     double t) {
  if (!(delta > 0.0)) throw ParameterError("delta must be > 0");
  if (lambda < 0.0) throw ParameterError("lambda must be >= 0");
  cfg.Validate();
  if (t <= 0.0 || std::isinf(cfg.tau)) return cfg.pi0;
  if (lambda == 0.0) return 0.0;
  const double target = lambda / delta;
  const double decay = std::exp(-2.0 * lambda * t / cfg.tau);
  return target / (1.0 - (1.0 - target / cfg.pi0) * decay);
}

double ShallowModeValue(double lambda, double delta,
                        const TrajectoryConfig& cfg, double t) {
  if (!(delta > 0.0)) throw ParameterError("delta must be > 0");
  cfg.Validate();
  if (t <= 0.0 || std::isinf(cfg.tau)) return cfg.pi0;
  const double decay = std::exp(-delta * t / cfg.tau);
  return lambda / delta * (1.0 - decay) + cfg.pi0 * decay;
}

double ModeValue(Depth depth, double lambda, double delta,
                 const TrajectoryConfig& cfg, double t) {
  return depth == Depth::kDeep ? DeepModeValue(lambda, delta, cfg, t)
                               : ShallowModeValue(lambda, delta, cfg, t);
}

AnalyticSVD ComputeAnalyticSVD(const Subproblem& sp) {
  sp.Validate();
  const int p = sp.NumPatterns();
  const double pd = p;
  const int nc = sp.CompInputs();
  const int ny = sp.CompOutputs();
  const double kx = sp.k_x, ky = sp.k_y, r2 = sp.r * sp.r;

  Eigen::MatrixXd omega_x = Eigen::MatrixXd::Zero(nc, p);
  if (nc > 0) omega_x = SignPatterns(sp.bits);
  Eigen::MatrixXd omega_y(ny, p);
  for (int s = 0; s < ny; ++s) omega_y.row(s) = omega_x.row(sp.selected[s]);

  AnalyticSVD svd;
  const Eigen::MatrixXd yx = omega_y * omega_x.transpose();
  svd.a_mat = yx.transpose() * yx;
  svd.b_mat = omega_y.transpose() * yx;
  svd.c_mat = omega_x.transpose() * omega_x * omega_x.transpose();

  // Identity directions orthogonal to the compositional rows.
  Eigen::MatrixXd projector = Eigen::MatrixXd::Identity(p, p);
  if (nc > 0) projector -= omega_x.transpose() * omega_x / pd;
  const double scale = sp.k_x > 0 && sp.k_y > 0 ? 1.0 / std::sqrt(kx * ky) : 1.0;
  Eigen::BDCSVD<Eigen::MatrixXd> factor(scale * projector,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  int q = 0;
  while (q < p && factor.singularValues()[q] > kRankTolerance) ++q;
  if (q != p - nc) {
    throw ConsistencyError("identity projector has rank " + std::to_string(q) +
                           ", expected " + std::to_string(p - nc));
  }
  svd.t_mat = factor.matrixU().leftCols(q);
  svd.h_mat = factor.singularValues().head(q).asDiagonal();
  svd.p_mat = factor.matrixV().leftCols(q);

  const int id_modes = sp.k_x > 0 ? q : 0;
  const int modes = nc + id_modes;
  svd.u_matrix = Eigen::MatrixXd::Zero(sp.OutputDim(), modes);
  svd.v_matrix = Eigen::MatrixXd::Zero(sp.InputDim(), modes);
  svd.s_matrix = Eigen::MatrixXd::Zero(modes, modes);
  svd.d_matrix = Eigen::MatrixXd::Zero(modes, modes);
  svd.mode_group.assign(modes, 0);

  if (nc > 0) {
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(nc, nc);
    const double in_norm = kx * r2 + pd;
    const double out_norm = ky * r2 + pd;
    svd.v_matrix.topLeftCorner(nc, nc) = std::sqrt(pd / in_norm) * eye;
    for (int b = 0; b < sp.k_x; ++b) {
      svd.v_matrix.block(nc + b * p, 0, p, nc) =
          std::sqrt(r2 / (pd * in_norm)) * omega_x.transpose();
    }
    if (ny > 0) {
      svd.u_matrix.topLeftCorner(ny, nc) = std::sqrt(1.0 / (pd * out_norm)) * yx;
    }
    if (sp.k_y > 0) {
      const Eigen::MatrixXd block =
          std::sqrt(r2 / (pd * pd * pd * out_norm)) * svd.b_mat +
          std::sqrt(1.0 / (pd * pd * pd * ky)) * (svd.c_mat - svd.b_mat);
      for (int b = 0; b < sp.k_y; ++b) {
        svd.u_matrix.block(ny + b * p, 0, p, nc) = block;
      }
    }
    const double p2 = pd * pd;
    svd.s_matrix.topLeftCorner(nc, nc) =
        std::sqrt(in_norm * out_norm / (p2 * p2 * p2)) * svd.a_mat +
        std::sqrt(in_norm * ky * r2 / p2) * (eye - svd.a_mat / p2);
    svd.d_matrix.topLeftCorner(nc, nc) = in_norm / pd * eye;
    for (int i = 0; i < nc; ++i) {
      const bool selected = svd.a_mat(i, i) > 0.5;
      svd.mode_group[i] = selected ? 1 : (sp.k_y > 0 ? 2 : 0);
    }
  }

  if (id_modes > 0) {
    for (int b = 0; b < sp.k_x; ++b) {
      svd.v_matrix.block(nc + b * p, nc, p, q) = svd.p_mat / std::sqrt(kx);
    }
    for (int b = 0; b < sp.k_y; ++b) {
      svd.u_matrix.block(ny + b * p, nc, p, q) = svd.t_mat / std::sqrt(ky);
    }
    for (int j = 0; j < q; ++j) {
      svd.s_matrix(nc + j, nc + j) = std::sqrt(kx * ky) * r2 / pd;
      svd.d_matrix(nc + j, nc + j) = kx * r2 / pd;
      svd.mode_group[nc + j] = sp.k_y > 0 ? 3 : 0;
    }
  }

  Eigen::MatrixXd x, y;
  SubproblemMatrices(sp, &x, &y);
  const Eigen::MatrixXd sigma_yx = y * x.transpose() / pd;
  const Eigen::MatrixXd sigma_x = x * x.transpose() / pd;
  const double res_yx =
      (svd.u_matrix * svd.s_matrix * svd.v_matrix.transpose() - sigma_yx).norm();
  const double res_x =
      (svd.v_matrix * svd.d_matrix * svd.v_matrix.transpose() - sigma_x).norm();
  if (!(res_yx <= kReconstructionLimit) || !(res_x <= kReconstructionLimit)) {
    throw ConsistencyError("analytic SVD does not reconstruct covariances "
                           "(USV^T residual " + std::to_string(res_yx) +
                           ", VDV^T residual " + std::to_string(res_x) + ")");
  }
  return svd;
}

AnalyticSVD ComputeAnalyticSVD(const Dataset& dataset) {
  return ComputeAnalyticSVD(WholeProblem(dataset));
}

BlockNormSquares ModuleNormSquares(const Subproblem& sp, double pi1_sq,
                                   double pi2_sq, double pi3_sq) {
  const double p = sp.NumPatterns();
  const double r2 = sp.r * sp.r;
  const double a_in = p / (sp.k_x * r2 + p);
  const double b_in = sp.k_x * r2 / (sp.k_x * r2 + p);
  const double a_out = p / (sp.k_y * r2 + p);
  const double b_out = sp.k_y * r2 / (sp.k_y * r2 + p);
  const double ny = sp.CompOutputs();
  const double unselected = sp.CompInputs() - sp.CompOutputs();
  const double identity = p - sp.CompInputs();
  const bool has_gy = sp.k_y > 0;
  const bool has_id = sp.k_x > 0 && sp.k_y > 0;

  BlockNormSquares n;
  n.comp_comp = ny * a_in * a_out * pi1_sq;
  n.noncomp_comp = ny * b_in * a_out * pi1_sq;
  n.comp_noncomp = ny * a_in * b_out * pi1_sq;
  n.noncomp_noncomp = ny * b_in * b_out * pi1_sq;
  if (has_gy) {
    n.comp_noncomp += unselected * a_in * pi2_sq;
    n.noncomp_noncomp += unselected * b_in * pi2_sq;
  }
  if (has_id) n.noncomp_noncomp += identity * pi3_sq;
  return n;
}

std::vector<ModeDescriptor> DescribeModes(
    const std::vector<ModuleSpec>& modules) {
  std::vector<ModeDescriptor> out;
  for (const ModuleSpec& m : modules) {
    const ModeSpectrum s = ComputeModeSpectrum(m.problem);
    for (int g = 1; g <= 3; ++g) {
      if (s.Multiplicity(g) == 0) continue;
      ModeDescriptor d;
      d.id = "mode_" + std::to_string(out.size() + 1);
      d.module = m.name;
      d.group = g;
      d.multiplicity = s.Multiplicity(g);
      d.lambda = s.Lambda(g);
      d.delta = s.Delta(g);
      d.pi_star = s.PiStar(g);
      out.push_back(d);
    }
  }
  return out;
}

NormCurves PredictedNorms(const std::vector<ModuleSpec>& modules, Depth depth,
                          const TrajectoryConfig& cfg, const ModeInit& init,
                          std::span<const double> times) {
  cfg.Validate();
  const std::vector<ModuleModel> models = BuildModels(modules, init);
  NormCurves curves;
  curves.times.assign(times.begin(), times.end());
  for (double t : times) {
    BlockNormSquares total;
    for (const ModuleModel& model : models) {
      const GroupMoments mom = Moments(model, depth, cfg, t);
      const BlockNormSquares n = ModuleNormSquares(
          model.spec->problem, mom.mean_sq[1], mom.mean_sq[2], mom.mean_sq[3]);
      total.comp_comp += n.comp_comp;
      total.noncomp_comp += n.noncomp_comp;
      total.comp_noncomp += n.comp_noncomp;
      total.noncomp_noncomp += n.noncomp_noncomp;
    }
    curves.comp_comp.push_back(std::sqrt(total.comp_comp));
    curves.noncomp_comp.push_back(std::sqrt(total.noncomp_comp));
    curves.comp_noncomp.push_back(std::sqrt(total.comp_noncomp));
    curves.noncomp_noncomp.push_back(std::sqrt(total.noncomp_noncomp));
  }
  return curves;
}

NormCurves PredictedNorms(const DatasetParams& params, const Architecture& arch,
                          const TrajectoryConfig& cfg,
                          std::span<const double> times) {
  std::vector<int> selected(params.n_y);
  for (int i = 0; i < params.n_y; ++i) selected[i] = i;
  return PredictedNorms(DecomposeModules(arch, params, selected),
                        DefaultDepth(arch), cfg, {}, times);
}

ModeCurves PredictedModes(const std::vector<ModuleSpec>& modules, Depth depth,
                          const TrajectoryConfig& cfg, const ModeInit& init,
                          std::span<const double> times) {
  cfg.Validate();
  const std::vector<ModuleModel> models = BuildModels(modules, init);
  ModeCurves curves;
  curves.modes = DescribeModes(modules);
  curves.times.assign(times.begin(), times.end());
  curves.values.assign(curves.modes.size(), {});
  for (double t : times) {
    std::size_t k = 0;
    for (const ModuleModel& model : models) {
      const GroupMoments mom = Moments(model, depth, cfg, t);
      for (int g = 1; g <= 3; ++g) {
        if (model.spectrum.Multiplicity(g) == 0) continue;
        curves.values[k++].push_back(mom.mean[g]);
      }
    }
  }
  return curves;
}

double ExactRankProbability3Features(int sample_size) {
  if (sample_size < 1 || sample_size > 8) {
    throw ParameterError("sample size must be in [1, 8]");
  }
  // The 8 patterns form 4 opposite pairs. Three patterns from three different
  // pairs are independent, so a sample is singular exactly when it touches at
  // most two pairs.
  double singular = 0.0;
  for (int pairs = 1; pairs <= 2; ++pairs) {
    double touching_all = 0.0;
    for (int j = 0; j <= pairs; ++j) {
      const double sign = j % 2 == 0 ? 1.0 : -1.0;
      touching_all +=
          sign * Binomial(pairs, j) * Binomial(2 * (pairs - j), sample_size);
    }
    singular += Binomial(4, pairs) * touching_all;
  }
  return 1.0 - singular / Binomial(8, sample_size);
}

void WriteCurvesCsv(std::ostream& out, const NormCurves& norms,
                    const ModeCurves& modes) {
  CsvWriter csv(out, {"t", "id", "value"});
  auto emit = [&](const std::string& id, const std::vector<double>& times,
                  const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      csv.Row({FormatDouble(times[i]), id, FormatDouble(values[i])});
    }
  };
  emit("norm_comp_comp", norms.times, norms.comp_comp);
  emit("norm_noncomp_comp", norms.times, norms.noncomp_comp);
  emit("norm_comp_noncomp", norms.times, norms.comp_noncomp);
  emit("norm_noncomp_noncomp", norms.times, norms.noncomp_noncomp);
  for (std::size_t m = 0; m < modes.modes.size(); ++m) {
    emit(modes.modes[m].id, modes.times, modes.values[m]);
  }
}

}  // namespace modlin
