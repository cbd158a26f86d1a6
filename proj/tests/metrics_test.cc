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

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "modlin/errors.h"

namespace modlin {
namespace {

const DatasetParams kFig3{3, 1, 3, 1, 1.0};

Eigen::MatrixXd RandomMatrix(int rows, int cols, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> n;
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = n(gen);
  }
  return m;
}

TEST(PartitionedNormsTest, SumOfSquaresIsFrobenius) {
  const Dataset d = BuildDataset(kFig3);
  for (unsigned seed = 0; seed < 20; ++seed) {
    const Eigen::MatrixXd w = RandomMatrix(9, 27, seed);
    const NormPartition p = PartitionedNorms(w, d.layout);
    EXPECT_NEAR(p.Total(), w.norm(), 1e-12);
  }
}

TEST(PartitionedNormsTest, BlocksAreReadFromTheRightPlace) {
  const Dataset d = BuildDataset(kFig3);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(9, 27);
  w(0, 0) = 3.0;   // comp in, comp out
  w(0, 5) = 4.0;   // noncomp in, comp out
  w(4, 1) = 5.0;   // comp in, noncomp out
  w(8, 26) = 6.0;  // noncomp in, noncomp out
  const NormPartition p = PartitionedNorms(w, d.layout);
  EXPECT_EQ(p.comp_comp, 3.0);
  EXPECT_EQ(p.noncomp_comp, 4.0);
  EXPECT_EQ(p.comp_noncomp, 5.0);
  EXPECT_EQ(p.noncomp_noncomp, 6.0);
  EXPECT_THROW(PartitionedNorms(Eigen::MatrixXd::Zero(9, 26), d.layout),
               ParameterError);
}

TEST(PartitionedNormsTest, Homogeneous) {
  const Dataset d = BuildDataset(kFig3);
  const Eigen::MatrixXd w = RandomMatrix(9, 27, 7);
  const NormPartition a = PartitionedNorms(w, d.layout);
  const NormPartition b = PartitionedNorms(-2.5 * w, d.layout);
  EXPECT_NEAR(b.comp_comp, 2.5 * a.comp_comp, 1e-12);
  EXPECT_NEAR(b.noncomp_noncomp, 2.5 * a.noncomp_noncomp, 1e-12);
}

TEST(EmpiricalModeValuesTest, CovarianceGivesSingularValues) {
  const Dataset d = BuildDataset(kFig3);
  const AnalyticSVD svd = ComputeAnalyticSVD(d);
  const Eigen::VectorXd v = EmpiricalModeValues(Covariances(d).sigma_yx, svd);
  EXPECT_LT((v - svd.SingularValues()).norm(), 1e-12);
  const std::vector<double> means = GroupMeans(v, svd);
  ASSERT_EQ(means.size(), 3u);
  EXPECT_NEAR(means[0], std::sqrt(99.0) / 8, 1e-12);
  EXPECT_NEAR(means[1], std::sqrt(11.0) / 8, 1e-12);
  EXPECT_NEAR(means[2], std::sqrt(3.0) / 8, 1e-12);
  EXPECT_THROW(EmpiricalModeValues(Eigen::MatrixXd::Zero(2, 2), svd),
               ParameterError);
}

TEST(VerdictTest, Thresholds) {
  NormPartition p{1.0, 0.0, 0.0, 0.5};
  EXPECT_EQ(SystematicityVerdict(p, DefaultVerdictTolerance(p)),
            Verdict::kSystematic);
  p.noncomp_comp = 0.2;
  EXPECT_EQ(SystematicityVerdict(p, DefaultVerdictTolerance(p)),
            Verdict::kNonSystematic);
  p = {1.0, 0.0, 0.3, 0.5};
  EXPECT_EQ(SystematicityVerdict(p, 1e-3), Verdict::kNonSystematic);
  p = {0.0, 0.0, 0.0, 0.5};
  EXPECT_EQ(SystematicityVerdict(p, 1e-3), Verdict::kNonSystematic);
  EXPECT_EQ(ToString(Verdict::kSystematic), "systematic");
}

CurveSet TwoCurves(double offset) {
  CurveSet c;
  c.times = {0, 10, 20};
  c.ids = {"mode_1", "norm_comp_comp"};
  c.values = {{0.1, 0.5 + offset, 0.9}, {0.0, 0.2, 0.7 - 2 * offset}};
  return c;
}

TEST(DeviationTest, MaxAbsPerSeries) {
  const DeviationReport r = Deviation(TwoCurves(0.01), TwoCurves(0.0));
  ASSERT_EQ(r.series.size(), 2u);
  EXPECT_NEAR(r.MaxModeDeviation(), 0.01, 1e-15);
  EXPECT_EQ(r.series[0].at_time, 10.0);
  EXPECT_NEAR(r.MaxNormDeviation(), 0.02, 1e-15);
  EXPECT_EQ(r.series[1].at_time, 20.0);
  EXPECT_EQ(Deviation(TwoCurves(0.0), TwoCurves(0.0)).MaxOver(""), 0.0);
}

TEST(DeviationTest, GridAndIdMismatch) {
  CurveSet a = TwoCurves(0.0);
  CurveSet b = TwoCurves(0.0);
  b.times[1] = 11;
  EXPECT_THROW(Deviation(a, b), ParameterError);
  b = TwoCurves(0.0);
  b.ids[0] = "mode_9";
  EXPECT_THROW(Deviation(a, b), ParameterError);
}

TEST(DeviationTest, CsvOutput) {
  std::ostringstream out;
  WriteDeviationCsv(Deviation(TwoCurves(0.5), TwoCurves(0.0)), out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "id,max_abs_deviation,epoch");
}

TEST(CurveSetTest, ToCurveSetIds) {
  const std::vector<double> t = {0.0, 100.0};
  const auto modules = DecomposeModules(Architecture::Dense(), kFig3, {0});
  const TrajectoryConfig cfg = TrajectoryConfig::FromLearningRate(0.01, 8, 1e-3);
  const CurveSet c =
      ToCurveSet(PredictedNorms(modules, Depth::kDeep, cfg, {}, t),
                 PredictedModes(modules, Depth::kDeep, cfg, {}, t));
  EXPECT_EQ(c.Get("norm_comp_comp").size(), 2u);
  EXPECT_EQ(c.Get("mode_3").size(), 2u);
  EXPECT_THROW(c.Get("mode_4"), ParameterError);
}

}  // namespace
}  // namespace modlin
