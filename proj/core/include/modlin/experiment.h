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

#ifndef MODLIN_EXPERIMENT_H_
#define MODLIN_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "modlin/analytic.h"
#include "modlin/architecture.h"
#include "modlin/config.h"
#include "modlin/dataset.h"
#include "modlin/linear_net.h"
#include "modlin/metrics.h"
#include "modlin/rank_mc.h"

namespace modlin {

// One simulated configuration. Repeats share everything except the seed.
struct RunSpec {
  std::string label = "main";
  std::string description;
  DatasetParams params;
  bool strip_comp_input = false;
  FeatureChoice feature_choice = FeatureChoice::kFirst;
  std::uint64_t feature_seed = 0;
  Architecture arch;
  Depth depth = Depth::kDeep;
  LearningRule rule;
  TrainConfig train;
  // 0 trains on every example; otherwise a random n_train:rest split.
  int n_train = 0;
  // Redraw splits until the compositional training inputs have full rank.
  bool full_rank_train = true;
};

struct RankSpec {
  std::vector<int> n_features;
  int trials = 5000;
};

struct ExperimentConfig {
  std::string name = "custom";
  std::string description;
  std::vector<RunSpec> runs;
  std::optional<RankSpec> rank;
  int repeats = 1;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency

  // Throws ParameterError naming the run and field at fault.
  void Validate() const;
};

struct PresetInfo {
  std::string name;
  std::string description;
};

std::vector<PresetInfo> ListPresets();
// Throws ParameterError for an unknown name.
ExperimentConfig Preset(const std::string& name);

// Builds a config from a parsed file. A global `preset = <name>` key starts
// from that preset; [run <label>] sections replace or add runs field by field.
ExperimentConfig ConfigFromTree(const ConfigTree& tree);
std::string SerializeConfig(const ExperimentConfig& config);

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<std::string> arch;
  std::optional<std::string> rule;
  std::optional<int> repeats;
  std::optional<int> threads;
};
void ApplyOverrides(const Overrides& overrides, ExperimentConfig* config);

// Mean and per-time standard deviation over repeats.
struct CurveStats {
  CurveSet mean;
  CurveSet stddev;
};
CurveStats AverageCurves(const std::vector<CurveSet>& runs);

struct RunResult {
  RunSpec spec;
  Dataset dataset;
  std::vector<ModeDescriptor> modes;
  CurveStats history;
  bool has_test = false;
  std::optional<CurveSet> predicted;  // full-data runs only
  std::optional<DeviationReport> deviation;
  int repeats = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunResult> runs;
  std::vector<std::vector<RankRow>> rank_tables;
};

// Repeats and runs execute on a bounded worker pool; results are collected
// in config order, so output does not depend on scheduling.
ExperimentResult RunExperiment(const ExperimentConfig& config);
RunResult RunSingle(const RunSpec& spec, int repeats, std::uint64_t seed,
                    int threads);

struct ManifestEntry {
  std::string file;
  std::string kind;
  std::string run;
  std::string schema;  // space-separated column names, empty for text files
  std::string description;
};

// Writes every artifact plus manifest.csv into `dir` (created if missing).
void WriteBundle(const ExperimentResult& result, const std::filesystem::path& dir);
std::vector<ManifestEntry> ReadManifest(const std::filesystem::path& dir);

// Deviation between a bundle history CSV (wide) and a predicted CSV (long).
DeviationReport CompareFiles(const std::filesystem::path& history_csv,
                             const std::filesystem::path& predicted_csv);

}  // namespace modlin

#endif  // MODLIN_EXPERIMENT_H_
