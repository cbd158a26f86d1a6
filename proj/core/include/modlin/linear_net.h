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

#ifndef MODLIN_LINEAR_NET_H_
#define MODLIN_LINEAR_NET_H_

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "modlin/analytic.h"
#include "modlin/architecture.h"
#include "modlin/dataset.h"
#include "modlin/metrics.h"

namespace modlin {

inline constexpr double kDefaultGammaSmall = 1e-3;
inline constexpr double kDefaultEtaMagnitude = 1e-3;

enum class RulePreset {
  kGradientDescent,
  kAntiHebbian,
  kContrastiveHebbian,
  kHebbian,
  kQuasiPredictiveCoding,
  kCustom,
};

// Two-parameter rule family. gamma weights the output-correlation term of the
// W2 update, eta the Hebbian term of the W1 update (eta > 0 uses the Oja-like
// branch, eta < 0 the row-norm branch).
struct LearningRule {
  double gamma = 0.0;
  double eta = 0.0;
  RulePreset preset = RulePreset::kGradientDescent;

  static LearningRule GradientDescent() { return {}; }
  static LearningRule AntiHebbian(double gamma_small = kDefaultGammaSmall,
                                  double eta_mag = kDefaultEtaMagnitude);
  static LearningRule ContrastiveHebbian();
  static LearningRule Hebbian(double gamma_small = kDefaultGammaSmall,
                              double eta_mag = kDefaultEtaMagnitude);
  static LearningRule QuasiPredictiveCoding();
  static LearningRule Custom(double gamma, double eta);

  bool IsGradientDescent() const { return gamma == 0.0 && eta == 0.0; }
};

std::string ToString(const LearningRule& rule);
// gd, anti-hebbian, contrastive-hebbian, hebbian, quasi-predictive-coding or
// custom:<gamma>:<eta>.
LearningRule ParseLearningRule(const std::string& text,
                               double gamma_small = kDefaultGammaSmall,
                               double eta_mag = kDefaultEtaMagnitude);

struct TrainConfig {
  double epsilon = 0.01;
  int epochs = 1000;
  double init_std = 1e-3;
  std::uint64_t seed = 0;
  int record_every = 1;
  int hidden_width = 0;  // 0 picks the smallest allowed width

  // epsilon == 0 is accepted and freezes the network.
  void Validate() const;
};

struct ModuleWeights {
  ModuleSpec spec;
  Eigen::MatrixXd w1;  // hidden x inputs; empty for shallow modules
  Eigen::MatrixXd w2;  // outputs x hidden, or outputs x inputs when shallow

  Eigen::MatrixXd Map() const { return w1.size() == 0 ? w2 : w2 * w1; }
};

struct NetworkState {
  Depth depth = Depth::kDeep;
  Architecture arch;
  int hidden_width = 0;
  BlockLayout layout;
  std::vector<ModuleWeights> modules;
};

// Smallest hidden width allowed for the architecture: 2^n_x for a dense deep
// network, otherwise the largest module Sigma_yx rank.
int MinimumHiddenWidth(const Dataset& dataset, const Architecture& arch);

NetworkState InitNetwork(const Dataset& dataset, const Architecture& arch,
                         Depth depth, const TrainConfig& cfg);

// Composed map of every module placed at its block position.
Eigen::MatrixXd EffectiveMap(const NetworkState& net);

// One analytic SVD per module, in module order.
std::vector<AnalyticSVD> ModuleSVDs(const NetworkState& net);

// Per-mode initial strengths for trajectory overlays. Deep modules use the
// balanced-growth estimate |W1 v + W2^T u|^2 / 4, shallow modules diag(U^T W V).
// Values are clamped below at 1e-12.
ModeInit InitialModeStrengths(const NetworkState& net,
                              const std::vector<AnalyticSVD>& svds);
// diag(U^T W V) per module, clamped below at 1e-12.
ModeInit DiagonalModeStrengths(const NetworkState& net,
                               const std::vector<AnalyticSVD>& svds);

struct HistoryRecord {
  int epoch = 0;
  double loss = 0.0;
  double test_loss = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> modes;  // group means, DescribeModes order
  NormPartition norms;
};

struct TrainingHistory {
  std::vector<ModeDescriptor> modes;
  std::vector<HistoryRecord> records;
  bool has_test = false;
  NetworkState final_state;

  CurveSet Curves() const;
};

struct TrainOptions {
  // Training example columns; empty means all examples.
  std::vector<int> train_columns;
  // Evaluated each record when non-empty.
  std::vector<int> test_columns;
};

// Full-batch training. Throws DivergenceError if the loss becomes non-finite
// or exceeds 1e6.
TrainingHistory Train(NetworkState net, const Dataset& dataset,
                      const LearningRule& rule, const TrainConfig& cfg,
                      const TrainOptions& options = {});

// Columns: epoch, loss, [test_loss,] mode_1..mode_k, norm_comp_comp,
// norm_noncomp_comp, norm_comp_noncomp, norm_noncomp_noncomp.
void WriteHistoryCsv(const TrainingHistory& history, std::ostream& out);

}  // namespace modlin

#endif  // MODLIN_LINEAR_NET_H_
