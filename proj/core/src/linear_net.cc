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

#include "modlin/linear_net.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "modlin/csv.h"
#include "modlin/errors.h"

namespace modlin {
namespace {

constexpr double kDivergenceLoss = 1e6;
constexpr double kStrengthFloor = 1e-12;

Eigen::MatrixXd RandomMatrix(int rows, int cols, double std_dev,
                             std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std_dev);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

double Loss(const Eigen::MatrixXd& map, const Eigen::MatrixXd& sigma_yy,
            const Eigen::MatrixXd& sigma_yx, const Eigen::MatrixXd& sigma_x) {
  return sigma_yy.trace() - 2.0 * (sigma_yx.cwiseProduct(map)).sum() +
         (map * sigma_x).cwiseProduct(map).sum();
}

void CheckColumns(const std::vector<int>& cols, int n, const char* what) {
  std::vector<bool> seen(n, false);
  for (int c : cols) {
    if (c < 0 || c >= n || seen[c]) {
      throw ParameterError(std::string(what) +
                           " columns must be distinct and in range");
    }
    seen[c] = true;
  }
}

Eigen::MatrixXd Block(const Eigen::MatrixXd& m, const RowRange& rows,
                      const RowRange& cols) {
  return m.block(rows.begin, cols.begin, rows.size(), cols.size());
}

}  // namespace

LearningRule LearningRule::AntiHebbian(double gamma_small, double eta_mag) {
  return {gamma_small, -std::abs(eta_mag), RulePreset::kAntiHebbian};
}

LearningRule LearningRule::ContrastiveHebbian() {
  return {1.0, 0.0, RulePreset::kContrastiveHebbian};
}

LearningRule LearningRule::Hebbian(double gamma_small, double eta_mag) {
  return {gamma_small, std::abs(eta_mag), RulePreset::kHebbian};
}

LearningRule LearningRule::QuasiPredictiveCoding() {
  return {-1.0, 0.0, RulePreset::kQuasiPredictiveCoding};
}

LearningRule LearningRule::Custom(double gamma, double eta) {
  return {gamma, eta, RulePreset::kCustom};
}

std::string ToString(const LearningRule& rule) {
  switch (rule.preset) {
    case RulePreset::kGradientDescent:
      return "gd";
    case RulePreset::kAntiHebbian:
      return "anti-hebbian";
    case RulePreset::kContrastiveHebbian:
      return "contrastive-hebbian";
    case RulePreset::kHebbian:
      return "hebbian";
    case RulePreset::kQuasiPredictiveCoding:
      return "quasi-predictive-coding";
    case RulePreset::kCustom:
      return "custom:" + FormatDouble(rule.gamma) + ":" + FormatDouble(rule.eta);
  }
  return "?";
}

LearningRule ParseLearningRule(const std::string& text, double gamma_small,
                               double eta_mag) {
  if (text == "gd") return LearningRule::GradientDescent();
  if (text == "anti-hebbian") return LearningRule::AntiHebbian(gamma_small, eta_mag);
  if (text == "contrastive-hebbian") return LearningRule::ContrastiveHebbian();
  if (text == "hebbian") return LearningRule::Hebbian(gamma_small, eta_mag);
  if (text == "quasi-predictive-coding") {
    return LearningRule::QuasiPredictiveCoding();
  }
  if (text.rfind("custom:", 0) == 0) {
    const std::string rest = text.substr(7);
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
      try {
        return LearningRule::Custom(std::stod(rest.substr(0, colon)),
                                    std::stod(rest.substr(colon + 1)));
      } catch (const std::exception&) {
      }
    }
  }
  throw ParameterError(
      "unknown learning rule '" + text +
      "' (expected gd, anti-hebbian, contrastive-hebbian, hebbian, "
      "quasi-predictive-coding or custom:<gamma>:<eta>)");
}

void TrainConfig::Validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw ParameterError("train config: epsilon must be >= 0");
  }
  if (!(init_std > 0.0)) {
    throw ParameterError("train config: init_std must be > 0");
  }
  if (epochs < 0) throw ParameterError("train config: epochs must be >= 0");
  if (record_every < 1) {
    throw ParameterError("train config: record_every must be >= 1");
  }
  if (hidden_width < 0) {
    throw ParameterError("train config: hidden_width must be >= 0");
  }
}

int MinimumHiddenWidth(const Dataset& dataset, const Architecture& arch) {
  if (arch.kind == ArchKind::kDense) return dataset.params.NumPatterns();
  int width = 1;
  for (const ModuleSpec& m : DecomposeModules(arch, dataset)) {
    width = std::max(width, ComputeModeSpectrum(m.problem).Rank());
  }
  return width;
}

NetworkState InitNetwork(const Dataset& dataset, const Architecture& arch,
                         Depth depth, const TrainConfig& cfg) {
  cfg.Validate();
  if (arch.kind == ArchKind::kShallow && depth == Depth::kDeep) {
    throw ParameterError("the shallow architecture has no hidden layer");
  }
  NetworkState net;
  net.depth = depth;
  net.arch = arch;
  net.layout = dataset.layout;
  if (depth == Depth::kDeep) {
    const int minimum = MinimumHiddenWidth(dataset, arch);
    net.hidden_width = cfg.hidden_width == 0 ? minimum : cfg.hidden_width;
    if (net.hidden_width < minimum) {
      throw ParameterError("hidden width " + std::to_string(net.hidden_width) +
                           " is below the required " + std::to_string(minimum) +
                           " for " + ToString(arch));
    }
  }
  std::mt19937_64 rng(cfg.seed);
  for (ModuleSpec& spec : DecomposeModules(arch, dataset)) {
    ModuleWeights m;
    const int in = spec.inputs.size();
    const int out = spec.outputs.size();
    if (depth == Depth::kDeep) {
      m.w1 = RandomMatrix(net.hidden_width, in, cfg.init_std, rng);
      m.w2 = RandomMatrix(out, net.hidden_width, cfg.init_std, rng);
    } else {
      m.w2 = RandomMatrix(out, in, cfg.init_std, rng);
    }
    m.spec = std::move(spec);
    net.modules.push_back(std::move(m));
  }
  return net;
}

Eigen::MatrixXd EffectiveMap(const NetworkState& net) {
  Eigen::MatrixXd map =
      Eigen::MatrixXd::Zero(net.layout.OutputDim(), net.layout.InputDim());
  for (const ModuleWeights& m : net.modules) {
    map.block(m.spec.outputs.begin, m.spec.inputs.begin, m.spec.outputs.size(),
              m.spec.inputs.size()) = m.Map();
  }
  return map;
}

std::vector<AnalyticSVD> ModuleSVDs(const NetworkState& net) {
  std::vector<AnalyticSVD> out;
  for (const ModuleWeights& m : net.modules) {
    out.push_back(ComputeAnalyticSVD(m.spec.problem));
  }
  return out;
}

ModeInit DiagonalModeStrengths(const NetworkState& net,
                               const std::vector<AnalyticSVD>& svds) {
  ModeInit init;
  for (std::size_t i = 0; i < net.modules.size(); ++i) {
    init.push_back(EmpiricalModeValues(net.modules[i].Map(), svds[i])
                       .cwiseMax(kStrengthFloor));
  }
  return init;
}

ModeInit InitialModeStrengths(const NetworkState& net,
                              const std::vector<AnalyticSVD>& svds) {
  if (net.depth == Depth::kShallow) return DiagonalModeStrengths(net, svds);
  ModeInit init;
  for (std::size_t i = 0; i < net.modules.size(); ++i) {
    const ModuleWeights& m = net.modules[i];
    const AnalyticSVD& svd = svds[i];
    // Hidden-space growing component of each mode from small weights.
    const Eigen::MatrixXd grow =
        m.w1 * svd.v_matrix + m.w2.transpose() * svd.u_matrix;
    Eigen::VectorXd strength = grow.colwise().squaredNorm().transpose() / 4.0;
    init.push_back(strength.cwiseMax(kStrengthFloor));
  }
  return init;
}

CurveSet TrainingHistory::Curves() const {
  CurveSet set;
  set.ids = {"loss", "norm_comp_comp", "norm_noncomp_comp",
             "norm_comp_noncomp", "norm_noncomp_noncomp"};
  if (has_test) set.ids.push_back("test_loss");
  for (const ModeDescriptor& d : modes) set.ids.push_back(d.id);
  set.values.assign(set.ids.size(), {});
  for (const HistoryRecord& r : records) {
    set.times.push_back(r.epoch);
    std::size_t k = 0;
    set.values[k++].push_back(r.loss);
    set.values[k++].push_back(r.norms.comp_comp);
    set.values[k++].push_back(r.norms.noncomp_comp);
    set.values[k++].push_back(r.norms.comp_noncomp);
    set.values[k++].push_back(r.norms.noncomp_noncomp);
    if (has_test) set.values[k++].push_back(r.test_loss);
    for (double v : r.modes) set.values[k++].push_back(v);
  }
  return set;
}

TrainingHistory Train(NetworkState net, const Dataset& dataset,
                      const LearningRule& rule, const TrainConfig& cfg,
                      const TrainOptions& options) {
  cfg.Validate();
  if (net.layout != dataset.layout) {
    throw ParameterError("network and dataset layouts differ");
  }
  if (net.depth == Depth::kShallow && !rule.IsGradientDescent()) {
    throw ParameterError("learning rule " + ToString(rule) +
                         " needs a hidden layer");
  }
  const int n = dataset.NumExamples();
  std::vector<int> train_cols = options.train_columns;
  if (train_cols.empty()) {
    train_cols.resize(n);
    for (int i = 0; i < n; ++i) train_cols[i] = i;
  }
  CheckColumns(train_cols, n, "train");
  CheckColumns(options.test_columns, n, "test");

  const CovariancePair cov = Covariances(dataset, train_cols);
  const Eigen::MatrixXd sigma_yy = OutputCovariance(dataset, train_cols);
  CovariancePair test_cov;
  Eigen::MatrixXd test_yy;
  const bool has_test = !options.test_columns.empty();
  if (has_test) {
    test_cov = Covariances(dataset, options.test_columns);
    test_yy = OutputCovariance(dataset, options.test_columns);
  }
  const double rate = cfg.epsilon * static_cast<double>(train_cols.size());

  struct ModuleStats {
    Eigen::MatrixXd sx, syx, syy;
  };
  std::vector<ModuleStats> stats;
  for (const ModuleWeights& m : net.modules) {
    stats.push_back({Block(cov.sigma_x, m.spec.inputs, m.spec.inputs),
                     Block(cov.sigma_yx, m.spec.outputs, m.spec.inputs),
                     Block(sigma_yy, m.spec.outputs, m.spec.outputs)});
  }

  const std::vector<AnalyticSVD> svds = ModuleSVDs(net);
  TrainingHistory history;
  history.has_test = has_test;
  {
    std::vector<ModuleSpec> specs;
    for (const ModuleWeights& m : net.modules) specs.push_back(m.spec);
    history.modes = DescribeModes(specs);
  }

  auto record = [&](int epoch, double loss, const Eigen::MatrixXd& map) {
    HistoryRecord r;
    r.epoch = epoch;
    r.loss = loss;
    if (has_test) {
      r.test_loss =
          Loss(map, test_yy, test_cov.sigma_yx, test_cov.sigma_x);
    }
    for (std::size_t i = 0; i < net.modules.size(); ++i) {
      const std::vector<double> means =
          GroupMeans(EmpiricalModeValues(net.modules[i].Map(), svds[i]), svds[i]);
      r.modes.insert(r.modes.end(), means.begin(), means.end());
    }
    r.norms = PartitionedNorms(map, net.layout);
    history.records.push_back(std::move(r));
  };

  Eigen::MatrixXd map = EffectiveMap(net);
  record(0, Loss(map, sigma_yy, cov.sigma_yx, cov.sigma_x), map);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < net.modules.size(); ++i) {
      ModuleWeights& m = net.modules[i];
      const ModuleStats& s = stats[i];
      if (net.depth == Depth::kShallow) {
        m.w2 += rate * (s.syx - m.w2 * s.sx);
        continue;
      }
      const Eigen::MatrixXd w = m.w2 * m.w1;
      const Eigen::MatrixXd err = s.syx - w * s.sx;
      Eigen::MatrixXd dw2 = err * m.w1.transpose();
      Eigen::MatrixXd dw1 = m.w2.transpose() * err;
      if (rule.gamma != 0.0) {
        dw2 += rule.gamma * (s.syy - w * s.sx * w.transpose()) * m.w2;
      }
      if (rule.eta > 0.0) {
        const Eigen::MatrixXd eye =
            Eigen::MatrixXd::Identity(m.w1.cols(), m.w1.cols());
        dw1 += rule.eta * (m.w1 * s.sx) * (eye - m.w1.transpose() * m.w1);
      } else if (rule.eta < 0.0) {
        const Eigen::VectorXd row_sq = m.w1.rowwise().squaredNorm();
        if ((row_sq.array() >= 1.0).any()) {
          throw DivergenceError(
              "hidden unit weight norm reached 1 under the eta < 0 rule", epoch);
        }
        const Eigen::VectorXd scale = (1.0 - row_sq.array()).inverse().matrix();
        dw1 += rule.eta * scale.asDiagonal() * (m.w1 * s.sx);
      }
      m.w2 += rate * dw2;
      m.w1 += rate * dw1;
    }
    map = EffectiveMap(net);
    const double loss = Loss(map, sigma_yy, cov.sigma_yx, cov.sigma_x);
    if (!std::isfinite(loss) || loss > kDivergenceLoss) {
      throw DivergenceError("training diverged (loss " + FormatDouble(loss) +
                                ")",
                            epoch);
    }
    if (epoch % cfg.record_every == 0 || epoch == cfg.epochs) {
      record(epoch, loss, map);
    }
  }
  history.final_state = std::move(net);
  return history;
}

void WriteHistoryCsv(const TrainingHistory& history, std::ostream& out) {
  std::vector<std::string> header = {"epoch", "loss"};
  if (history.has_test) header.push_back("test_loss");
  for (const ModeDescriptor& d : history.modes) header.push_back(d.id);
  for (const char* id : {"norm_comp_comp", "norm_noncomp_comp",
                         "norm_comp_noncomp", "norm_noncomp_noncomp"}) {
    header.push_back(id);
  }
  CsvWriter csv(out, header);
  for (const HistoryRecord& r : history.records) {
    std::vector<std::string> row = {std::to_string(r.epoch),
                                    FormatDouble(r.loss)};
    if (history.has_test) row.push_back(FormatDouble(r.test_loss));
    for (double v : r.modes) row.push_back(FormatDouble(v));
    for (double v : {r.norms.comp_comp, r.norms.noncomp_comp,
                     r.norms.comp_noncomp, r.norms.noncomp_noncomp}) {
      row.push_back(FormatDouble(v));
    }
    csv.Row(row);
  }
}

}  // namespace modlin
