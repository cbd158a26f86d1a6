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

#include "modlin/rank_mc.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "modlin/csv.h"
#include "modlin/dataset.h"
#include "modlin/errors.h"

namespace modlin {
namespace {

constexpr int kMaxMonteCarloFeatures = 10;
constexpr int kMaxEnumerationFeatures = 4;

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool SampleFullRank(const Eigen::MatrixXd& patterns, int sample_size,
                    std::uint64_t seed) {
  const int total = static_cast<int>(patterns.cols());
  std::mt19937_64 rng(seed);
  std::vector<int> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates: the first sample_size entries are the draw.
  for (int i = 0; i < sample_size; ++i) {
    std::uniform_int_distribution<int> pick(i, total - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  Eigen::MatrixXd sample(patterns.rows(), sample_size);
  for (int i = 0; i < sample_size; ++i) sample.col(i) = patterns.col(idx[i]);
  return NumericalRank(sample) == patterns.rows();
}

}  // namespace

void RankTrial::Validate() const {
  if (n_features < 1 || n_features > kMaxMonteCarloFeatures) {
    throw ParameterError("rank trial: n_features must be in [1, " +
                         std::to_string(kMaxMonteCarloFeatures) + "]");
  }
  if (sample_size < 1 || sample_size > (1 << n_features)) {
    throw ParameterError("rank trial: sample_size must be in [1, 2^n_features]");
  }
  if (trials < 1) throw ParameterError("rank trial: trials must be >= 1");
}

int NumericalRank(const Eigen::MatrixXd& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return static_cast<int>((svd.singularValues().array() > tol).count());
}

RankEstimate EstimateFullRankProbability(const RankTrial& trial, int threads) {
  trial.Validate();
  const Eigen::MatrixXd patterns = SignPatterns(trial.n_features);
  threads = std::clamp(threads, 1, trial.trials);
  std::vector<int> counts(threads, 0);
  auto work = [&](int worker) {
    for (int t = worker; t < trial.trials; t += threads) {
      const std::uint64_t seed = SplitMix64(trial.seed ^ SplitMix64(t));
      if (SampleFullRank(patterns, trial.sample_size, seed)) ++counts[worker];
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (std::thread& th : pool) th.join();
  }
  RankEstimate est;
  est.trials = trial.trials;
  est.full_rank = std::accumulate(counts.begin(), counts.end(), 0);
  est.probability = static_cast<double>(est.full_rank) / trial.trials;
  est.std_error =
      std::sqrt(est.probability * (1.0 - est.probability) / trial.trials);
  return est;
}

double EnumerateFullRankProbability(int n_features, int sample_size) {
  if (n_features < 1 || n_features > kMaxEnumerationFeatures) {
    throw ParameterError("enumeration supports 1 <= n_features <= " +
                         std::to_string(kMaxEnumerationFeatures));
  }
  const int total = 1 << n_features;
  if (sample_size < 1 || sample_size > total) {
    throw ParameterError("sample_size must be in [1, 2^n_features]");
  }
  const Eigen::MatrixXd patterns = SignPatterns(n_features);
  std::vector<bool> mask(total, false);
  std::fill(mask.begin(), mask.begin() + sample_size, true);
  long subsets = 0;
  long full = 0;
  Eigen::MatrixXd sample(n_features, sample_size);
  do {
    int c = 0;
    for (int j = 0; j < total; ++j) {
      if (mask[j]) sample.col(c++) = patterns.col(j);
    }
    ++subsets;
    if (NumericalRank(sample) == n_features) ++full;
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return static_cast<double>(full) / subsets;
}

std::vector<RankRow> RankTable(int n_features, int trials, std::uint64_t seed,
                               int threads) {
  std::vector<RankRow> rows;
  for (int size = 1; size <= (1 << n_features); ++size) {
    RankTrial trial{n_features, size, trials,
                    SplitMix64(seed + static_cast<std::uint64_t>(size))};
    const RankEstimate est = EstimateFullRankProbability(trial, threads);
    RankRow row{n_features, size, est.probability, est.std_error, std::nullopt};
    if (n_features <= kMaxEnumerationFeatures) {
      row.exact = EnumerateFullRankProbability(n_features, size);
    }
    rows.push_back(row);
  }
  return rows;
}

void WriteRankCsv(const std::vector<RankRow>& rows, std::ostream& out) {
  CsvWriter csv(out, {"n_features", "sample_size", "estimate", "std_error",
                      "exact_if_available"});
  for (const RankRow& r : rows) {
    csv.Row({std::to_string(r.n_features), std::to_string(r.sample_size),
             FormatDouble(r.estimate), FormatDouble(r.std_error),
             r.exact ? FormatDouble(*r.exact) : std::string()});
  }
}

}  // namespace modlin
