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

// Command-line front end: dataset generation, closed-form curves, training
// runs, curve comparison, rank tables and preset reproduction.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "modlin/analytic.h"
#include "modlin/csv.h"
#include "modlin/errors.h"
#include "modlin/experiment.h"
#include "modlin/rank_mc.h"

namespace {

using modlin::ExperimentConfig;

struct DatasetFlags {
  modlin::DatasetParams params{3, 1, 3, 1, 1.0};
  bool random_features = false;
  std::uint64_t feature_seed = 0;
  bool strip = false;

  void Add(CLI::App* cmd) {
    cmd->add_option("--n-x", params.n_x, "compositional input bits")->capture_default_str();
    cmd->add_option("--n-y", params.n_y, "compositional output features")->capture_default_str();
    cmd->add_option("--k-x", params.k_x, "input identity blocks")->capture_default_str();
    cmd->add_option("--k-y", params.k_y, "output identity blocks")->capture_default_str();
    cmd->add_option("--r", params.r, "identity block scale")->capture_default_str();
    cmd->add_flag("--random-features", random_features,
                  "sample the copied output features instead of taking the first n_y");
    cmd->add_option("--feature-seed", feature_seed, "seed for --random-features");
    cmd->add_flag("--strip-comp-input", strip,
                  "drop the compositional input rows (identity-only dataset)");
  }

  modlin::FeatureChoice Choice() const {
    return random_features ? modlin::FeatureChoice::kSeededRandom
                           : modlin::FeatureChoice::kFirst;
  }

  modlin::Dataset Build() const {
    modlin::Dataset d = modlin::BuildDataset(params, Choice(), feature_seed);
    return strip ? modlin::StripCompositionalInput(d) : d;
  }
};

void PrintRunSummary(const modlin::ExperimentResult& result) {
  for (const modlin::RunResult& r : result.runs) {
    const auto& loss = r.history.mean.Get("loss");
    std::cout << r.spec.label << ": final loss " << modlin::FormatDouble(loss.back(), 6);
    if (r.has_test) {
      std::cout << ", final test loss "
                << modlin::FormatDouble(r.history.mean.Get("test_loss").back(), 6);
    }
    if (r.deviation) {
      std::cout << ", max mode deviation "
                << modlin::FormatDouble(r.deviation->MaxModeDeviation(), 4)
                << ", max norm deviation "
                << modlin::FormatDouble(r.deviation->MaxNormDeviation(), 4);
    }
    std::cout << "\n";
  }
}

int Fail(const std::string& kind, const std::exception& e, int code) {
  std::cerr << "modlin: " << kind << ": " << e.what() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compositional dataset space: closed-form learning dynamics and "
               "linear network simulation"};
  app.require_subcommand(1);

  // list-presets
  auto* list = app.add_subcommand("list-presets", "list the reproducible presets");

  // gen-dataset
  auto* gen = app.add_subcommand("gen-dataset", "write a dataset as CSV");
  DatasetFlags gen_data;
  std::string gen_out = ".";
  gen_data.Add(gen);
  gen->add_option("--out", gen_out, "output directory")->capture_default_str();

  // theory
  auto* theory = app.add_subcommand("theory", "closed-form spectrum and curves");
  DatasetFlags th_data;
  std::string th_arch = "dense", th_depth, th_out = ".";
  double th_lr = 1.25e-3, th_pi0 = 1e-3;
  int th_epochs = 6000, th_step = 10;
  th_data.Add(theory);
  theory->add_option("--arch", th_arch, "architecture")->capture_default_str();
  theory->add_option("--depth", th_depth, "shallow or deep (default from --arch)");
  theory->add_option("--lr", th_lr, "learning rate")->capture_default_str();
  theory->add_option("--pi0", th_pi0, "initial mode strength")->capture_default_str();
  theory->add_option("--epochs", th_epochs, "time horizon")->capture_default_str();
  theory->add_option("--step", th_step, "time step")->capture_default_str();
  theory->add_option("--out", th_out, "output directory")->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "train one configuration and write a bundle");
  DatasetFlags tr_data;
  std::string tr_arch = "dense", tr_depth, tr_rule = "gd", tr_out = "run";
  modlin::TrainConfig tr_cfg;
  tr_cfg.epsilon = 1.25e-3;
  tr_cfg.epochs = 6000;
  tr_cfg.record_every = 10;
  int tr_n_train = 0, tr_repeats = 1, tr_threads = 0;
  std::uint64_t tr_seed = 1;
  tr_data.Add(train);
  train->add_option("--arch", tr_arch, "architecture")->capture_default_str();
  train->add_option("--depth", tr_depth, "shallow or deep (default from --arch)");
  train->add_option("--rule", tr_rule, "learning rule")->capture_default_str();
  train->add_option("--lr", tr_cfg.epsilon, "learning rate")->capture_default_str();
  train->add_option("--epochs", tr_cfg.epochs, "epochs")->capture_default_str();
  train->add_option("--init-std", tr_cfg.init_std, "init standard deviation")->capture_default_str();
  train->add_option("--hidden", tr_cfg.hidden_width, "hidden width (0 = minimum)")->capture_default_str();
  train->add_option("--record-every", tr_cfg.record_every, "history stride")->capture_default_str();
  train->add_option("--n-train", tr_n_train, "training examples (0 = all)")->capture_default_str();
  train->add_option("--repeats", tr_repeats, "repeats")->capture_default_str();
  train->add_option("--seed", tr_seed, "base seed")->capture_default_str();
  train->add_option("--threads", tr_threads, "worker threads (0 = all cores)");
  train->add_option("--out", tr_out, "bundle directory")->capture_default_str();

  // compare
  auto* compare = app.add_subcommand("compare", "deviation between simulated and predicted curves");
  std::string cmp_history, cmp_predicted, cmp_out;
  compare->add_option("--history", cmp_history, "bundle *_history.csv")->required();
  compare->add_option("--predicted", cmp_predicted, "bundle *_predicted.csv")->required();
  compare->add_option("--out", cmp_out, "write the report as key=value text");

  // rank
  auto* rank = app.add_subcommand("rank", "full-rank sample probabilities");
  int rk_features = 3, rk_trials = 5000, rk_threads = 0;
  std::uint64_t rk_seed = 1;
  std::string rk_out;
  rank->add_option("--n-features", rk_features, "pattern bits")->capture_default_str();
  rank->add_option("--trials", rk_trials, "Monte-Carlo trials per size")->capture_default_str();
  rank->add_option("--seed", rk_seed, "seed")->capture_default_str();
  rank->add_option("--threads", rk_threads, "worker threads (0 = all cores)");
  rank->add_option("--out", rk_out, "CSV path (default stdout)");

  // reproduce
  auto* repro = app.add_subcommand("reproduce", "run a preset or config file into a bundle");
  std::string rp_preset, rp_config, rp_out;
  modlin::Overrides rp_over;
  repro->add_option("--preset", rp_preset, "preset name (see list-presets)");
  repro->add_option("--config", rp_config, "config file");
  repro->add_option("--out", rp_out, "bundle directory (default: preset name)");
  repro->add_option("--seed", rp_over.seed, "override base seed");
  repro->add_option("--epochs", rp_over.epochs, "override epochs");
  repro->add_option("--lr", rp_over.lr, "override learning rate");
  repro->add_option("--arch", rp_over.arch, "override architecture");
  repro->add_option("--rule", rp_over.rule, "override learning rule");
  repro->add_option("--repeats", rp_over.repeats, "override repeats");
  repro->add_option("--threads", rp_over.threads, "worker threads (0 = all cores)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      for (const auto& p : modlin::ListPresets()) {
        std::cout << p.name << "\t" << p.description << "\n";
      }
    } else if (*gen) {
      const modlin::Dataset d = gen_data.Build();
      modlin::WriteDataset(d, gen_out);
      std::cout << "wrote " << d.input.rows() << "x" << d.NumExamples()
                << " input and " << d.output.rows() << "x" << d.NumExamples()
                << " output to " << gen_out << "\n";
    } else if (*theory) {
      const modlin::Dataset d = th_data.Build();
      const modlin::Architecture arch = modlin::ParseArchitecture(th_arch);
      const modlin::Depth depth =
          th_depth.empty() ? modlin::DefaultDepth(arch) : modlin::ParseDepth(th_depth);
      if (th_step < 1) throw modlin::ParameterError("--step must be >= 1");
      const auto modules = modlin::DecomposeModules(arch, d);
      std::vector<double> times;
      for (int t = 0; t <= th_epochs; t += th_step) times.push_back(t);
      const auto cfg = modlin::TrajectoryConfig::FromLearningRate(
          th_lr, d.NumExamples(), th_pi0);
      std::filesystem::create_directories(th_out);
      std::ofstream curves(std::filesystem::path(th_out) / "predicted.csv",
                           std::ios::binary);
      modlin::WriteCurvesCsv(
          curves, modlin::PredictedNorms(modules, depth, cfg, {}, times),
          modlin::PredictedModes(modules, depth, cfg, {}, times));
      const modlin::ModeSpectrum s =
          modlin::ComputeModeSpectrum(modlin::WholeProblem(d));
      modlin::KeyValues kv;
      kv["dataset"] = modlin::ToString(d.params);
      kv["lambda1"] = modlin::FormatDouble(s.lambda1, 12);
      kv["lambda2"] = modlin::FormatDouble(s.lambda2, 12);
      kv["lambda3"] = modlin::FormatDouble(s.lambda3, 12);
      kv["delta1"] = modlin::FormatDouble(s.delta1, 12);
      kv["delta2"] = modlin::FormatDouble(s.delta2, 12);
      kv["pi1_star"] = modlin::FormatDouble(s.pi1_star, 12);
      kv["pi2_star"] = modlin::FormatDouble(s.pi2_star, 12);
      kv["pi3_star"] = s.pi3_defined ? modlin::FormatDouble(s.pi3_star, 12) : "undefined";
      kv["mult1"] = std::to_string(s.mult1);
      kv["mult2"] = std::to_string(s.mult2);
      kv["mult3"] = std::to_string(s.mult3);
      modlin::WriteKeyValues(kv, std::filesystem::path(th_out) / "spectrum.txt");
      for (const auto& [k, v] : kv) std::cout << k << " = " << v << "\n";
    } else if (*train) {
      ExperimentConfig config;
      config.name = "train";
      modlin::RunSpec run;
      run.params = tr_data.params;
      run.feature_choice = tr_data.Choice();
      run.feature_seed = tr_data.feature_seed;
      run.strip_comp_input = tr_data.strip;
      run.arch = modlin::ParseArchitecture(tr_arch);
      run.depth = tr_depth.empty() ? modlin::DefaultDepth(run.arch)
                                   : modlin::ParseDepth(tr_depth);
      run.rule = modlin::ParseLearningRule(tr_rule);
      run.train = tr_cfg;
      run.n_train = tr_n_train;
      config.runs = {run};
      config.repeats = tr_repeats;
      config.seed = tr_seed;
      config.threads = tr_threads;
      const auto result = modlin::RunExperiment(config);
      modlin::WriteBundle(result, tr_out);
      PrintRunSummary(result);
    } else if (*compare) {
      const modlin::DeviationReport report =
          modlin::CompareFiles(cmp_history, cmp_predicted);
      modlin::WriteDeviationCsv(report, std::cout);
      if (!cmp_out.empty()) modlin::WriteDeviationKeyValues(report, cmp_out);
    } else if (*rank) {
      const auto rows = modlin::RankTable(rk_features, rk_trials, rk_seed, rk_threads);
      if (rk_out.empty()) {
        modlin::WriteRankCsv(rows, std::cout);
      } else {
        std::ofstream out(rk_out, std::ios::binary);
        modlin::WriteRankCsv(rows, out);
      }
    } else if (*repro) {
      if (rp_preset.empty() == rp_config.empty()) {
        throw modlin::ParameterError("give exactly one of --preset or --config");
      }
      ExperimentConfig config =
          rp_preset.empty()
              ? modlin::ConfigFromTree(modlin::ReadConfigFile(rp_config))
              : modlin::Preset(rp_preset);
      modlin::ApplyOverrides(rp_over, &config);
      const std::string out = rp_out.empty() ? config.name : rp_out;
      const auto result = modlin::RunExperiment(config);
      modlin::WriteBundle(result, out);
      PrintRunSummary(result);
      std::cout << "bundle written to " << out << "\n";
    }
  } catch (const modlin::ParameterError& e) {
    return Fail("invalid configuration", e, 2);
  } catch (const modlin::DivergenceError& e) {
    return Fail("diverged at epoch " + std::to_string(e.epoch()), e, 3);
  } catch (const modlin::ConsistencyError& e) {
    return Fail("internal consistency check failed", e, 4);
  } catch (const std::exception& e) {
    return Fail("error", e, 1);
  }
  return 0;
}
