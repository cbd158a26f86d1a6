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

#ifndef MODLIN_RANK_MC_H_
#define MODLIN_RANK_MC_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

namespace modlin {

struct RankTrial {
  int n_features = 3;
  int sample_size = 3;
  int trials = 5000;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct RankEstimate {
  double probability = 0.0;
  double std_error = 0.0;  // binomial, sqrt(p (1 - p) / trials)
  int full_rank = 0;
  int trials = 0;
};

// Numerical rank with absolute singular-value tolerance 1e-8.
int NumericalRank(const Eigen::MatrixXd& m, double tol = 1e-8);

// Fraction of trials in which sample_size distinct sign patterns, drawn
// without replacement, have full rank n_features. Trial i draws from its own
// generator seeded from (seed, i), so the result does not depend on
// `threads`.
RankEstimate EstimateFullRankProbability(const RankTrial& trial,
                                         int threads = 1);

// Exact fraction over every sample_size subset. n_features <= 4.
double EnumerateFullRankProbability(int n_features, int sample_size);

struct RankRow {
  int n_features = 0;
  int sample_size = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::optional<double> exact;
};

// Estimates for every sample size in [1, 2^n_features], with the exact value
// filled in when n_features <= 4.
std::vector<RankRow> RankTable(int n_features, int trials, std::uint64_t seed,
                               int threads = 1);

// Columns: n_features, sample_size, estimate, std_error, exact_if_available.
void WriteRankCsv(const std::vector<RankRow>& rows, std::ostream& out);

}  // namespace modlin

#endif  // MODLIN_RANK_MC_H_
