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

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "modlin/errors.h"
#include "oracles.h"

namespace modlin {
namespace {

const DatasetParams kFig3{3, 1, 3, 1, 1.0};

TrainConfig Config(int epochs, double eps = 0.02) {
  TrainConfig cfg;
  cfg.epsilon = eps;
  cfg.epochs = epochs;
  cfg.seed = 3;
  cfg.record_every = 10;
  return cfg;
}

TEST(LearningRuleTest, Presets) {
  EXPECT_TRUE(LearningRule::GradientDescent().IsGradientDescent());
  const LearningRule anti = LearningRule::AntiHebbian(0.01, 0.02);
  EXPECT_EQ(anti.gamma, 0.01);
  EXPECT_EQ(anti.eta, -0.02);
  EXPECT_EQ(LearningRule::Hebbian(0.01, -0.02).eta, 0.02);
  EXPECT_EQ(LearningRule::ContrastiveHebbian().gamma, 1.0);
  EXPECT_EQ(LearningRule::QuasiPredictiveCoding().gamma, -1.0);
  EXPECT_EQ(LearningRule::QuasiPredictiveCoding().eta, 0.0);
}

TEST(LearningRuleTest, ParseRoundTrip) {
  for (const LearningRule& r :
       {LearningRule::GradientDescent(), LearningRule::AntiHebbian(),
        LearningRule::ContrastiveHebbian(), LearningRule::Hebbian(),
        LearningRule::QuasiPredictiveCoding(), LearningRule::Custom(0.25, -0.5)}) {
    const LearningRule back = ParseLearningRule(ToString(r));
    EXPECT_EQ(back.gamma, r.gamma) << ToString(r);
    EXPECT_EQ(back.eta, r.eta) << ToString(r);
    EXPECT_EQ(back.preset, r.preset) << ToString(r);
  }
  EXPECT_THROW(ParseLearningRule("oja"), ParameterError);
  EXPECT_THROW(ParseLearningRule("custom:1"), ParameterError);
}

TEST(TrainConfigTest, Validation) {
  TrainConfig cfg;
  cfg.init_std = 0.0;
  EXPECT_THROW(cfg.Validate(), ParameterError);
  cfg = {};
  cfg.epsilon = -1e-3;
  EXPECT_THROW(cfg.Validate(), ParameterError);
  cfg = {};
  cfg.epsilon = 0.0;
  EXPECT_NO_THROW(cfg.Validate());
}

TEST(InitNetworkTest, ShapesPerArchitecture) {
  const Dataset d = BuildDataset(kFig3);
  const NetworkState dense = InitNetwork(d, Architecture::Dense(), Depth::kDeep, {});
  ASSERT_EQ(dense.modules.size(), 1u);
  EXPECT_EQ(dense.hidden_width, 8);
  EXPECT_EQ(dense.modules[0].w1.rows(), 8);
  EXPECT_EQ(dense.modules[0].w1.cols(), 27);
  EXPECT_EQ(dense.modules[0].w2.rows(), 9);

  const NetworkState shallow =
      InitNetwork(d, Architecture::Shallow(), Depth::kShallow, {});
  EXPECT_EQ(shallow.modules[0].w1.size(), 0);
  EXPECT_EQ(shallow.modules[0].w2.rows(), 9);
  EXPECT_EQ(shallow.modules[0].w2.cols(), 27);

  const NetworkState split =
      InitNetwork(d, Architecture::FullyPartitioned(), Depth::kDeep, {});
  ASSERT_EQ(split.modules.size(), 2u);
  EXPECT_EQ(split.modules[0].w1.cols(), 3);
  EXPECT_EQ(split.modules[1].w1.cols(), 24);
  EXPECT_EQ(EffectiveMap(split).rows(), 9);
  EXPECT_EQ(EffectiveMap(split).cols(), 27);
}

TEST(InitNetworkTest, Rejections) {
  const Dataset d = BuildDataset(kFig3);
  EXPECT_THROW(InitNetwork(d, Architecture::Shallow(), Depth::kDeep, {}),
               ParameterError);
  TrainConfig narrow;
  narrow.hidden_width = 4;
  EXPECT_THROW(InitNetwork(d, Architecture::Dense(), Depth::kDeep, narrow),
               ParameterError);
}

TEST(InitNetworkTest, SeedDeterminesWeights) {
  const Dataset d = BuildDataset(kFig3);
  TrainConfig a;
  a.seed = 11;
  TrainConfig b = a;
  const NetworkState x = InitNetwork(d, Architecture::Dense(), Depth::kDeep, a);
  const NetworkState y = InitNetwork(d, Architecture::Dense(), Depth::kDeep, b);
  EXPECT_EQ(x.modules[0].w1, y.modules[0].w1);
  b.seed = 12;
  const NetworkState z = InitNetwork(d, Architecture::Dense(), Depth::kDeep, b);
  EXPECT_NE(x.modules[0].w1, z.modules[0].w1);
}

TEST(TrainTest, ZeroLearningRateFreezesWeights) {
  const Dataset d = BuildDataset(kFig3);
  TrainConfig cfg = Config(50, 0.0);
  const NetworkState net = InitNetwork(d, Architecture::Dense(), Depth::kDeep, cfg);
  const TrainingHistory h =
      Train(net, d, LearningRule::GradientDescent(), cfg);
  EXPECT_EQ(h.final_state.modules[0].w1, net.modules[0].w1);
  EXPECT_EQ(h.records.front().loss, h.records.back().loss);
}

TEST(TrainTest, RecordsFollowSchedule) {
  const Dataset d = BuildDataset(kFig3);
  TrainConfig cfg = Config(25);
  const TrainingHistory h =
      Train(InitNetwork(d, Architecture::Dense(), Depth::kDeep, cfg), d,
            LearningRule::GradientDescent(), cfg);
  std::vector<int> epochs;
  for (const HistoryRecord& r : h.records) epochs.push_back(r.epoch);
  EXPECT_EQ(epochs, (std::vector<int>{0, 10, 20, 25}));
  EXPECT_EQ(h.modes.size(), 3u);
  EXPECT_EQ(h.records[0].modes.size(), 3u);
  EXPECT_FALSE(h.has_test);
}

TEST(TrainTest, ShallowConvergesToLeastSquares) {
  const Dataset d = BuildDataset(kFig3);
  TrainConfig cfg = Config(3000);
  // Weights outside the data span never move; keep them negligible.
  cfg.init_std = 1e-7;
  const TrainingHistory h =
      Train(InitNetwork(d, Architecture::Shallow(), Depth::kShallow, cfg), d,
            LearningRule::GradientDescent(), cfg);
  const Eigen::MatrixXd want = oracle::LeastSquaresMap(oracle::Build(3, 1, 3, 1, 1.0));
  EXPECT_LT((EffectiveMap(h.final_state) - want).norm(), 1e-3);
}

TEST(TrainTest, DeepLossNeverIncreasesAndConverges) {
  const Dataset d = BuildDataset(kFig3);
  TrainConfig cfg = Config(4000);
  const TrainingHistory h =
      Train(InitNetwork(d, Architecture::Dense(), Depth::kDeep, cfg), d,
            LearningRule::GradientDescent(), cfg);
  for (std::size_t i = 1; i < h.records.size(); ++i) {
    EXPECT_LE(h.records[i].loss, h.records[i - 1].loss + 1e-12) << i;
  }
  const Eigen::MatrixXd want = oracle::LeastSquaresMap(oracle::Build(3, 1, 3, 1, 1.0));
  EXPECT_LT((EffectiveMap(h.final_state) - want).norm(), 1e-2);
  EXPECT_NEAR(h.records.back().norms.comp_comp, 8.0 / 11, 1e-2);
}

TEST(TrainTest, FullyPartitionedModulesStayIsolated) {
  const Dataset d = BuildDataset(kFig3);
  TrainConfig cfg = Config(300);
  const TrainingHistory h =
      Train(InitNetwork(d, Architecture::FullyPartitioned(), Depth::kDeep, cfg), d,
            LearningRule::GradientDescent(), cfg);
  for (const HistoryRecord& r : h.records) {
    EXPECT_EQ(r.norms.noncomp_comp, 0.0);
    EXPECT_EQ(r.norms.comp_noncomp, 0.0);
  }
}

TEST(TrainTest, TestLossIsTracked) {
  const Dataset d = BuildDataset({3, 2, 0, 0, 1.0});
  TrainConfig cfg = Config(200);
  TrainOptions opts;
  opts.train_columns = {0, 3, 5};
  opts.test_columns = {1, 2, 4, 6, 7};
  const TrainingHistory h =
      Train(InitNetwork(d, Architecture::Dense(), Depth::kDeep, cfg), d,
            LearningRule::GradientDescent(), cfg, opts);
  EXPECT_TRUE(h.has_test);
  for (const HistoryRecord& r : h.records) EXPECT_TRUE(std::isfinite(r.test_loss));
  const CurveSet c = h.Curves();
  EXPECT_EQ(c.ids[5], "test_loss");
  opts.test_columns = {8};
  EXPECT_THROW(Train(InitNetwork(d, Architecture::Dense(), Depth::kDeep, cfg), d,
                     LearningRule::GradientDescent(), cfg, opts),
               ParameterError);
}

TEST(TrainTest, LargeStepDiverges) {
  const Dataset d = BuildDataset(kFig3);
  TrainConfig cfg = Config(2000, 1.0);
  cfg.init_std = 0.5;
  EXPECT_THROW(Train(InitNetwork(d, Architecture::Dense(), Depth::kDeep, cfg), d,
                     LearningRule::GradientDescent(), cfg),
               DivergenceError);
}

TEST(TrainTest, ShallowRejectsNonGradientRules) {
  const Dataset d = BuildDataset(kFig3);
  TrainConfig cfg = Config(10);
  EXPECT_THROW(Train(InitNetwork(d, Architecture::Shallow(), Depth::kShallow, cfg),
                     d, LearningRule::Hebbian(), cfg),
               ParameterError);
}

TEST(InitialModeStrengthsTest, PositiveAndSmall) {
  const Dataset d = BuildDataset(kFig3);
  const NetworkState net = InitNetwork(d, Architecture::Dense(), Depth::kDeep, {});
  const ModeInit init = InitialModeStrengths(net, ModuleSVDs(net));
  ASSERT_EQ(init.size(), 1u);
  EXPECT_EQ(init[0].size(), 8);
  EXPECT_GT(init[0].minCoeff(), 0.0);
  EXPECT_LT(init[0].maxCoeff(), 1e-3);
}

TEST(HistoryCsvTest, Header) {
  const Dataset d = BuildDataset(kFig3);
  TrainConfig cfg = Config(10);
  const TrainingHistory h =
      Train(InitNetwork(d, Architecture::Dense(), Depth::kDeep, cfg), d,
            LearningRule::GradientDescent(), cfg);
  std::ostringstream out;
  WriteHistoryCsv(h, out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "epoch,loss,mode_1,mode_2,mode_3,norm_comp_comp,norm_noncomp_comp,"
            "norm_comp_noncomp,norm_noncomp_noncomp");
}

}  // namespace
}  // namespace modlin
