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

#include "modlin/experiment.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "modlin/csv.h"
#include "modlin/errors.h"

namespace modlin {
namespace {

constexpr int kMaxSplitAttempts = 10000;

std::uint64_t Mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Shortest round-trip text, used where values must survive a re-read.
std::string Shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

int ResolveThreads(int requested, int tasks) {
  int n = requested > 0 ? requested
                        : static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(n, 1, std::max(1, tasks));
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. The exception of the
// lowest failing index is rethrown.
void ParallelFor(int n, int threads, const std::function<void(int)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  threads = ResolveThreads(threads, n);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

RunSpec DeepFig3Run(const std::string& label, const Architecture& arch) {
  RunSpec run;
  run.label = label;
  run.params = {3, 1, 3, 1, 1.0};
  run.arch = arch;
  run.depth = DefaultDepth(arch);
  run.train.epsilon = 1.25e-3;
  run.train.epochs = 6000;
  run.train.init_std = 1e-3;
  run.train.record_every = 10;
  run.train.hidden_width = run.depth == Depth::kDeep ? 100 : 0;
  return run;
}

RunSpec GeneralizationRun(const std::string& label, DatasetParams params,
                     bool strip) {
  RunSpec run;
  run.label = label;
  run.params = params;
  run.strip_comp_input = strip;
  run.arch = Architecture::Dense();
  run.train.epsilon = 0.02;
  run.train.epochs = 3000;
  run.train.init_std = 1e-3;
  run.train.hidden_width = 50;
  run.train.record_every = 10;
  run.n_train = 3;
  return run;
}

struct PresetDef {
  PresetInfo info;
  std::function<ExperimentConfig()> build;
};

const std::vector<PresetDef>& Presets() {
  static const std::vector<PresetDef> presets = [] {
    std::vector<PresetDef> p;
    p.push_back({{"fig3", "deep and shallow dense networks on (n_x,n_y,k_x,k_y,r) = "
                          "(3,1,3,1,1) against the closed-form trajectories"},
                 [] {
                   ExperimentConfig c;
                   c.runs = {DeepFig3Run("deep", Architecture::Dense()),
                             DeepFig3Run("shallow", Architecture::Shallow())};
                   return c;
                 }});
    p.push_back({{"fig5-split", "output-partitioned and fully-partitioned deep "
                                "networks on the fig3 dataset"},
                 [] {
                   ExperimentConfig c;
                   c.runs = {DeepFig3Run("output-partitioned",
                                         Architecture::OutputPartitioned()),
                             DeepFig3Run("fully-partitioned",
                                         Architecture::FullyPartitioned())};
                   return c;
                 }});
    const struct {
      const char* letter;
      DatasetParams params;
      bool strip;
      const char* what;
    } datasets[] = {
        {"A", {3, 2, 0, 0, 0.0}, false, "compositional only"},
        {"B", {3, 0, 1, 1, 2.0}, true, "identity only, 8 examples"},
        {"C", {3, 2, 1, 1, 2.0}, false, "compositional plus identity"},
        {"D", {3, 0, 1, 1, 2.0}, false, "no compositional output"},
        {"E", {3, 2, 1, 0, 2.0}, false, "no identity output"},
    };
    for (const auto& d : datasets) {
      const std::string name = std::string("appendixA-dataset") + d.letter;
      const RunSpec run = GeneralizationRun(std::string("dataset") + d.letter,
                                       d.params, d.strip);
      p.push_back({{name, std::string("dataset ") + d.letter + " (" + d.what +
                              "), 3:5 split, 50 hidden units, lr 0.02, 50 "
                              "repeats"},
                   [run] {
                     ExperimentConfig c;
                     c.runs = {run};
                     c.repeats = 50;
                     return c;
                   }});
    }
    p.push_back({{"appendixG-sweep", "imperfect output partitions of k_y = 2 "
                                     "identity blocks on (3,1,3,2,1)"},
                 [] {
                   ExperimentConfig c;
                   for (int left = 0; left <= 2; ++left) {
                     RunSpec run = DeepFig3Run(
                         "left" + std::to_string(left),
                         Architecture::ImperfectPartition(left, 2 - left));
                     run.params.k_y = 2;
                     c.runs.push_back(run);
                   }
                   return c;
                 }});
    p.push_back({{"appendixH", "gradient descent and the four alternative "
                               "learning rules on the fig3 dataset"},
                 [] {
                   ExperimentConfig c;
                   const std::pair<const char*, LearningRule> rules[] = {
                       {"gd", LearningRule::GradientDescent()},
                       {"anti-hebbian", LearningRule::AntiHebbian()},
                       {"contrastive-hebbian", LearningRule::ContrastiveHebbian()},
                       {"hebbian", LearningRule::Hebbian()},
                       {"quasi-predictive-coding",
                        LearningRule::QuasiPredictiveCoding()},
                   };
                   for (const auto& [label, rule] : rules) {
                     RunSpec run = DeepFig3Run(label, Architecture::Dense());
                     run.rule = rule;
                     c.runs.push_back(run);
                   }
                   return c;
                 }});
    p.push_back({{"rank-tables", "full-rank sample probabilities for 3 and 4 "
                                 "features, 5000 trials per size"},
                 [] {
                   ExperimentConfig c;
                   c.rank = RankSpec{{3, 4}, 5000};
                   return c;
                 }});
    for (PresetDef& def : p) {
      auto build = def.build;
      const PresetInfo info = def.info;
      def.build = [build, info] {
        ExperimentConfig c = build();
        c.name = info.name;
        c.description = info.description;
        c.seed = 1;
        return c;
      };
    }
    return p;
  }();
  return presets;
}

void ReadRunFields(const FieldReader& f, RunSpec* run) {
  if (auto v = f.String("description")) run->description = *v;
  if (auto v = f.Integer("n_x")) run->params.n_x = static_cast<int>(*v);
  if (auto v = f.Integer("n_y")) run->params.n_y = static_cast<int>(*v);
  if (auto v = f.Integer("k_x")) run->params.k_x = static_cast<int>(*v);
  if (auto v = f.Integer("k_y")) run->params.k_y = static_cast<int>(*v);
  if (auto v = f.Real("r")) run->params.r = *v;
  if (auto v = f.Boolean("strip_comp_input")) run->strip_comp_input = *v;
  if (auto v = f.String("feature_choice")) {
    if (*v == "first") {
      run->feature_choice = FeatureChoice::kFirst;
    } else if (*v == "random") {
      run->feature_choice = FeatureChoice::kSeededRandom;
    } else {
      throw ParameterError("field 'feature_choice': expected first or random");
    }
  }
  if (auto v = f.Integer("feature_seed")) run->feature_seed = *v;
  if (auto v = f.String("arch")) {
    run->arch = ParseArchitecture(*v);
    run->depth = DefaultDepth(run->arch);
  }
  if (auto v = f.String("depth")) run->depth = ParseDepth(*v);
  double gamma_small = kDefaultGammaSmall;
  double eta_mag = kDefaultEtaMagnitude;
  if (auto v = f.Real("gamma_small")) gamma_small = *v;
  if (auto v = f.Real("eta_magnitude")) eta_mag = *v;
  if (auto v = f.String("rule")) run->rule = ParseLearningRule(*v, gamma_small, eta_mag);
  if (auto v = f.Real("epsilon")) run->train.epsilon = *v;
  if (auto v = f.Integer("epochs")) run->train.epochs = static_cast<int>(*v);
  if (auto v = f.Real("init_std")) run->train.init_std = *v;
  if (auto v = f.Integer("hidden_width")) run->train.hidden_width = static_cast<int>(*v);
  if (auto v = f.Integer("record_every")) run->train.record_every = static_cast<int>(*v);
  if (auto v = f.Integer("n_train")) run->n_train = static_cast<int>(*v);
  if (auto v = f.Boolean("full_rank_train")) run->full_rank_train = *v;
}

void ValidateRun(const RunSpec& run) {
  run.params.Validate();
  run.arch.Validate(run.params);
  run.train.Validate();
  if (run.arch.kind == ArchKind::kShallow && run.depth == Depth::kDeep) {
    throw ParameterError("field 'depth': the shallow architecture has no hidden layer");
  }
  if (run.depth == Depth::kShallow && !run.rule.IsGradientDescent()) {
    throw ParameterError("field 'rule': " + ToString(run.rule) +
                         " needs a deep network");
  }
  if (run.strip_comp_input && (run.params.n_y > 0 || run.params.k_x == 0)) {
    throw ParameterError(
        "field 'strip_comp_input': needs n_y = 0 and k_x >= 1");
  }
  const int p = run.params.NumPatterns();
  if (run.n_train < 0 || run.n_train > p) {
    throw ParameterError("field 'n_train': must be in [0, " + std::to_string(p) +
                         "]");
  }
  if (run.n_train > 0 && run.full_rank_train && run.n_train < run.params.n_x) {
    throw ParameterError("field 'n_train': a full-rank training sample needs "
                         "at least n_x examples");
  }
  if (run.depth == Depth::kDeep && run.train.hidden_width > 0) {
    Dataset d = BuildDataset(run.params, run.feature_choice, run.feature_seed);
    if (run.strip_comp_input) d = StripCompositionalInput(d);
    const int minimum = MinimumHiddenWidth(d, run.arch);
    if (run.train.hidden_width < minimum) {
      throw ParameterError("field 'hidden_width': " +
                           std::to_string(run.train.hidden_width) +
                           " is below the required " + std::to_string(minimum));
    }
  }
}

Dataset MakeDataset(const RunSpec& spec) {
  Dataset d = BuildDataset(spec.params, spec.feature_choice, spec.feature_seed);
  return spec.strip_comp_input ? StripCompositionalInput(d) : d;
}

ExampleSplit DrawSplit(const RunSpec& spec, const Dataset& d,
                       std::uint64_t seed) {
  const Eigen::MatrixXd comp = SignPatterns(spec.params.n_x);
  for (int attempt = 0; attempt < kMaxSplitAttempts; ++attempt) {
    ExampleSplit split = SplitExamples(d, spec.n_train, Mix(seed, attempt));
    if (!spec.full_rank_train ||
        NumericalRank(GatherColumns(comp, split.train)) == spec.params.n_x) {
      return split;
    }
  }
  throw ParameterError("run '" + spec.label +
                       "': no full-rank training split found");
}

struct RepeatOutput {
  CurveSet history;
  std::optional<CurveSet> predicted;
};

RepeatOutput RunRepeat(const RunSpec& spec, const Dataset& d,
                       std::uint64_t seed) {
  TrainConfig cfg = spec.train;
  cfg.seed = Mix(seed, 1);
  TrainOptions options;
  if (spec.n_train > 0) {
    const ExampleSplit split = DrawSplit(spec, d, Mix(seed, 2));
    options.train_columns = split.train;
    options.test_columns = split.test;
  }
  NetworkState net = InitNetwork(d, spec.arch, spec.depth, cfg);
  RepeatOutput out;
  ModeInit init;
  if (spec.n_train == 0) init = InitialModeStrengths(net, ModuleSVDs(net));
  std::vector<ModuleSpec> modules;
  for (const ModuleWeights& m : net.modules) modules.push_back(m.spec);

  const TrainingHistory history = Train(std::move(net), d, spec.rule, cfg, options);
  out.history = history.Curves();
  if (spec.n_train == 0) {
    const TrajectoryConfig tc =
        TrajectoryConfig::FromLearningRate(cfg.epsilon, d.NumExamples(), 1.0);
    out.predicted = ToCurveSet(
        PredictedNorms(modules, spec.depth, tc, init, out.history.times),
        PredictedModes(modules, spec.depth, tc, init, out.history.times));
  }
  return out;
}

RunResult Collect(const RunSpec& spec, const Dataset& d,
                  std::vector<RepeatOutput>& outputs) {
  RunResult result;
  result.spec = spec;
  result.dataset = d;
  result.repeats = static_cast<int>(outputs.size());
  result.modes = DescribeModes(DecomposeModules(spec.arch, d));
  result.has_test = spec.n_train > 0;
  std::vector<CurveSet> histories, predicted;
  for (RepeatOutput& o : outputs) {
    histories.push_back(std::move(o.history));
    if (o.predicted) predicted.push_back(std::move(*o.predicted));
  }
  result.history = AverageCurves(histories);
  if (!predicted.empty()) {
    result.predicted = AverageCurves(predicted).mean;
    result.deviation = Deviation(result.history.mean, *result.predicted);
  }
  return result;
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write " + path.string());
  out << text;
}

std::string Join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

void ExperimentConfig::Validate() const {
  if (repeats < 1) throw ParameterError("field 'repeats': must be >= 1");
  if (threads < 0) throw ParameterError("field 'threads': must be >= 0");
  if (runs.empty() && !rank) {
    throw ParameterError("experiment '" + name + "' has no runs and no rank tables");
  }
  std::vector<std::string> labels;
  for (const RunSpec& run : runs) {
    if (run.label.empty() ||
        run.label.find_first_of(" /\\,") != std::string::npos) {
      throw ParameterError("run label '" + run.label +
                           "' must be non-empty without spaces, commas or slashes");
    }
    if (std::find(labels.begin(), labels.end(), run.label) != labels.end()) {
      throw ParameterError("duplicate run label '" + run.label + "'");
    }
    labels.push_back(run.label);
    try {
      ValidateRun(run);
    } catch (const ParameterError& e) {
      throw ParameterError("run '" + run.label + "': " + e.what());
    }
  }
  if (rank) {
    if (rank->trials < 1) throw ParameterError("rank: field 'trials': must be >= 1");
    for (int n : rank->n_features) {
      RankTrial{n, 1, rank->trials, 0}.Validate();
    }
  }
}

std::vector<PresetInfo> ListPresets() {
  std::vector<PresetInfo> out;
  for (const PresetDef& p : Presets()) out.push_back(p.info);
  return out;
}

ExperimentConfig Preset(const std::string& name) {
  // Short form appendixA-<letter> for appendixA-dataset<letter>.
  const std::string short_prefix = "appendixA-";
  const std::string wanted =
      name.size() == short_prefix.size() + 1 && name.rfind(short_prefix, 0) == 0
          ? short_prefix + "dataset" + name.back()
          : name;
  for (const PresetDef& p : Presets()) {
    if (p.info.name == wanted) return p.build();
  }
  std::vector<std::string> names;
  for (const PresetDef& p : Presets()) names.push_back(p.info.name);
  throw ParameterError("unknown preset '" + name + "' (available: " +
                       Join(names, ", ") + ")");
}

ExperimentConfig ConfigFromTree(const ConfigTree& tree) {
  FieldReader globals("config", tree.globals);
  ExperimentConfig config;
  if (auto v = globals.String("preset")) config = Preset(*v);
  if (auto v = globals.String("name")) config.name = *v;
  if (auto v = globals.String("description")) config.description = *v;
  if (auto v = globals.Integer("repeats")) config.repeats = static_cast<int>(*v);
  if (auto v = globals.Integer("seed")) config.seed = static_cast<std::uint64_t>(*v);
  if (auto v = globals.Integer("threads")) config.threads = static_cast<int>(*v);
  globals.RejectUnknown();

  for (const ConfigSection& section : tree.sections) {
    const std::string where = "config [" + section.kind + " " + section.label +
                              "] (line " + std::to_string(section.line) + ")";
    FieldReader f(where, section.values);
    if (section.kind == "run") {
      if (section.label.empty()) throw ParameterError(where + ": run needs a label");
      auto it = std::find_if(config.runs.begin(), config.runs.end(),
                             [&](const RunSpec& r) { return r.label == section.label; });
      if (it == config.runs.end()) {
        RunSpec fresh;
        fresh.label = section.label;
        config.runs.push_back(fresh);
        it = config.runs.end() - 1;
      }
      try {
        ReadRunFields(f, &*it);
      } catch (const ParameterError& e) {
        const std::string msg = e.what();
        throw ParameterError(msg.rfind("config", 0) == 0 ? msg : where + ": " + msg);
      }
    } else if (section.kind == "rank") {
      RankSpec rank = config.rank.value_or(RankSpec{});
      if (auto v = f.IntegerList("n_features")) rank.n_features = *v;
      if (auto v = f.Integer("trials")) rank.trials = static_cast<int>(*v);
      config.rank = rank;
    } else {
      throw ParameterError(where + ": unknown section kind '" + section.kind +
                           "' (expected run or rank)");
    }
    f.RejectUnknown();
  }
  return config;
}

std::string SerializeConfig(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "name = " << c.name << "\n";
  if (!c.description.empty()) out << "description = " << c.description << "\n";
  out << "repeats = " << c.repeats << "\n";
  out << "seed = " << c.seed << "\n";
  for (const RunSpec& r : c.runs) {
    out << "\n[run " << r.label << "]\n";
    if (!r.description.empty()) out << "description = " << r.description << "\n";
    out << "n_x = " << r.params.n_x << "\n"
        << "n_y = " << r.params.n_y << "\n"
        << "k_x = " << r.params.k_x << "\n"
        << "k_y = " << r.params.k_y << "\n"
        << "r = " << Shortest(r.params.r) << "\n"
        << "strip_comp_input = " << (r.strip_comp_input ? "true" : "false") << "\n"
        << "feature_choice = "
        << (r.feature_choice == FeatureChoice::kFirst ? "first" : "random") << "\n"
        << "feature_seed = " << r.feature_seed << "\n"
        << "arch = " << ToString(r.arch) << "\n"
        << "depth = " << ToString(r.depth) << "\n";
    if (r.rule.preset == RulePreset::kCustom) {
      out << "rule = custom:" << Shortest(r.rule.gamma) << ":"
          << Shortest(r.rule.eta) << "\n";
    } else {
      out << "rule = " << ToString(r.rule) << "\n";
      if (r.rule.preset == RulePreset::kAntiHebbian ||
          r.rule.preset == RulePreset::kHebbian) {
        out << "gamma_small = " << Shortest(r.rule.gamma) << "\n"
            << "eta_magnitude = " << Shortest(std::abs(r.rule.eta)) << "\n";
      }
    }
    out << "epsilon = " << Shortest(r.train.epsilon) << "\n"
        << "epochs = " << r.train.epochs << "\n"
        << "init_std = " << Shortest(r.train.init_std) << "\n"
        << "hidden_width = " << r.train.hidden_width << "\n"
        << "record_every = " << r.train.record_every << "\n"
        << "n_train = " << r.n_train << "\n"
        << "full_rank_train = " << (r.full_rank_train ? "true" : "false") << "\n";
  }
  if (c.rank) {
    std::vector<std::string> ns;
    for (int n : c.rank->n_features) ns.push_back(std::to_string(n));
    out << "\n[rank tables]\n"
        << "n_features = " << Join(ns, ",") << "\n"
        << "trials = " << c.rank->trials << "\n";
  }
  return out.str();
}

void ApplyOverrides(const Overrides& o, ExperimentConfig* config) {
  if (o.seed) config->seed = *o.seed;
  if (o.repeats) config->repeats = *o.repeats;
  if (o.threads) config->threads = *o.threads;
  for (RunSpec& run : config->runs) {
    if (o.epochs) run.train.epochs = *o.epochs;
    if (o.lr) run.train.epsilon = *o.lr;
    if (o.arch) {
      run.arch = ParseArchitecture(*o.arch);
      run.depth = DefaultDepth(run.arch);
      if (run.depth == Depth::kShallow) run.train.hidden_width = 0;
    }
    if (o.rule) run.rule = ParseLearningRule(*o.rule);
  }
}

CurveStats AverageCurves(const std::vector<CurveSet>& runs) {
  if (runs.empty()) throw ParameterError("nothing to average");
  CurveStats stats;
  stats.mean = runs.front();
  stats.stddev = runs.front();
  const double n = static_cast<double>(runs.size());
  for (const CurveSet& r : runs) {
    if (r.ids != stats.mean.ids || r.times != stats.mean.times) {
      throw ConsistencyError("repeats produced different curve layouts");
    }
  }
  for (std::size_t c = 0; c < stats.mean.ids.size(); ++c) {
    for (std::size_t t = 0; t < stats.mean.times.size(); ++t) {
      double sum = 0.0;
      for (const CurveSet& r : runs) sum += r.values[c][t];
      const double mean = sum / n;
      double sq = 0.0;
      for (const CurveSet& r : runs) {
        sq += (r.values[c][t] - mean) * (r.values[c][t] - mean);
      }
      stats.mean.values[c][t] = mean;
      stats.stddev.values[c][t] = runs.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
    }
  }
  return stats;
}

RunResult RunSingle(const RunSpec& spec, int repeats, std::uint64_t seed,
                    int threads) {
  ExperimentConfig config;
  config.runs = {spec};
  config.repeats = repeats;
  config.seed = seed;
  config.threads = threads;
  return std::move(RunExperiment(config).runs.front());
}

ExperimentResult RunExperiment(const ExperimentConfig& config) {
  config.Validate();
  ExperimentResult result;
  result.config = config;

  std::vector<Dataset> datasets;
  for (const RunSpec& run : config.runs) datasets.push_back(MakeDataset(run));

  const int tasks = static_cast<int>(config.runs.size()) * config.repeats;
  std::vector<RepeatOutput> outputs(tasks);
  ParallelFor(tasks, config.threads, [&](int i) {
    const int run = i / config.repeats;
    const int rep = i % config.repeats;
    const std::uint64_t seed =
        Mix(Mix(config.seed, static_cast<std::uint64_t>(run)), rep);
    try {
      outputs[i] = RunRepeat(config.runs[run], datasets[run], seed);
    } catch (const DivergenceError& e) {
      throw DivergenceError("run '" + config.runs[run].label + "' repeat " +
                                std::to_string(rep) + ": " + e.what(),
                            e.epoch());
    }
  });

  for (std::size_t r = 0; r < config.runs.size(); ++r) {
    std::vector<RepeatOutput> mine(
        std::make_move_iterator(outputs.begin() + r * config.repeats),
        std::make_move_iterator(outputs.begin() + (r + 1) * config.repeats));
    result.runs.push_back(Collect(config.runs[r], datasets[r], mine));
  }

  if (config.rank) {
    for (std::size_t k = 0; k < config.rank->n_features.size(); ++k) {
      result.rank_tables.push_back(
          RankTable(config.rank->n_features[k], config.rank->trials,
                    Mix(config.seed, 1000 + k), ResolveThreads(config.threads, 64)));
    }
  }
  return result;
}

void WriteBundle(const ExperimentResult& result,
                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<ManifestEntry> manifest;
  auto add = [&](std::string file, std::string kind, std::string run,
                 std::vector<std::string> schema, std::string description) {
    manifest.push_back({std::move(file), std::move(kind), std::move(run),
                        Join(schema, " "), std::move(description)});
  };

  const ExperimentConfig& c = result.config;
  KeyValues info;
  info["name"] = c.name;
  info["description"] = c.description;
  info["repeats"] = std::to_string(c.repeats);
  info["seed"] = std::to_string(c.seed);
  std::vector<std::string> labels;
  for (const RunResult& r : result.runs) {
    labels.push_back(r.spec.label);
    const std::string key = "run." + r.spec.label + ".";
    info[key + "arch"] = ToString(r.spec.arch);
    info[key + "depth"] = ToString(r.spec.depth);
    info[key + "rule"] = ToString(r.spec.rule);
    info[key + "dataset"] = ToString(r.spec.params);
    info[key + "n_train"] = std::to_string(r.spec.n_train);
  }
  info["runs"] = Join(labels, ",");
  WriteKeyValues(info, dir / "experiment.txt");
  add("experiment.txt", "experiment", "", {}, "experiment metadata (key=value)");
  WriteText(dir / "config.txt", SerializeConfig(c));
  add("config.txt", "config", "", {}, "resolved config, reusable with --config");

  for (const RunResult& r : result.runs) {
    const std::string& label = r.spec.label;
    WriteDataset(r.dataset, dir, label + "_dataset");
    add(label + "_dataset_input.csv", "dataset-input", label, {},
        "input matrix, rows = features, columns = examples");
    add(label + "_dataset_output.csv", "dataset-output", label, {},
        "output matrix, rows = features, columns = examples");
    add(label + "_dataset_meta.txt", "dataset-meta", label, {},
        "dataset params and block layout (key=value)");

    {
      std::ofstream out(dir / (label + "_modes.csv"), std::ios::binary);
      const std::vector<std::string> header = {"id", "module", "group",
                                               "multiplicity", "lambda",
                                               "delta", "pi_star"};
      CsvWriter csv(out, header);
      for (const ModeDescriptor& m : r.modes) {
        csv.Row({m.id, m.module, std::to_string(m.group),
                 std::to_string(m.multiplicity), FormatDouble(m.lambda),
                 FormatDouble(m.delta), FormatDouble(m.pi_star)});
      }
      add(label + "_modes.csv", "modes", label, header,
          "tracked mode groups per module");
    }
    {
      std::ofstream out(dir / (label + "_history.csv"), std::ios::binary);
      std::vector<std::string> header = {"epoch"};
      for (const std::string& id : r.history.mean.ids) {
        header.push_back(id);
        header.push_back(id + "_std");
      }
      CsvWriter csv(out, header);
      for (std::size_t t = 0; t < r.history.mean.times.size(); ++t) {
        std::vector<std::string> row = {FormatDouble(r.history.mean.times[t])};
        for (std::size_t k = 0; k < r.history.mean.ids.size(); ++k) {
          row.push_back(FormatDouble(r.history.mean.values[k][t]));
          row.push_back(FormatDouble(r.history.stddev.values[k][t]));
        }
        csv.Row(row);
      }
      add(label + "_history.csv", "history", label, header,
          "simulated curves, mean and standard deviation over repeats");
    }
    if (r.predicted) {
      std::ofstream out(dir / (label + "_predicted.csv"), std::ios::binary);
      CsvWriter csv(out, {"t", "id", "value"});
      for (std::size_t k = 0; k < r.predicted->ids.size(); ++k) {
        for (std::size_t t = 0; t < r.predicted->times.size(); ++t) {
          csv.Row({FormatDouble(r.predicted->times[t]), r.predicted->ids[k],
                   FormatDouble(r.predicted->values[k][t])});
        }
      }
      add(label + "_predicted.csv", "predicted", label, {"t", "id", "value"},
          "closed-form curves (long format)");
    }
    if (r.deviation) {
      WriteDeviationKeyValues(*r.deviation, dir / (label + "_deviation.txt"));
      add(label + "_deviation.txt", "deviation-summary", label, {},
          "max-abs deviation per curve (key=value)");
      std::ofstream out(dir / (label + "_deviation.csv"), std::ios::binary);
      WriteDeviationCsv(*r.deviation, out);
      add(label + "_deviation.csv", "deviation", label,
          {"id", "max_abs_deviation", "epoch"}, "max-abs deviation per curve");
    }
  }

  for (const std::vector<RankRow>& table : result.rank_tables) {
    if (table.empty()) continue;
    const std::string file =
        "rank_n" + std::to_string(table.front().n_features) + ".csv";
    std::ofstream out(dir / file, std::ios::binary);
    WriteRankCsv(table, out);
    add(file, "rank-table", "",
        {"n_features", "sample_size", "estimate", "std_error",
         "exact_if_available"},
        "full-rank sample probability per sample size");
  }

  std::ofstream out(dir / "manifest.csv", std::ios::binary);
  CsvWriter csv(out, {"file", "kind", "run", "schema", "description"});
  for (const ManifestEntry& e : manifest) {
    csv.Row({e.file, e.kind, e.run, e.schema, e.description});
  }
}

std::vector<ManifestEntry> ReadManifest(const std::filesystem::path& dir) {
  const CsvTable table = ReadCsv(dir / "manifest.csv");
  const std::size_t file = table.Column("file"), kind = table.Column("kind"),
                    run = table.Column("run"), schema = table.Column("schema"),
                    desc = table.Column("description");
  std::vector<ManifestEntry> out;
  for (const auto& row : table.rows) {
    out.push_back({row[file], row[kind], row[run], row[schema], row[desc]});
  }
  return out;
}

DeviationReport CompareFiles(const std::filesystem::path& history_csv,
                             const std::filesystem::path& predicted_csv) {
  const CsvTable history = ReadCsv(history_csv);
  CurveSet sim;
  sim.times = history.NumericColumn("epoch");
  for (const std::string& name : history.header) {
    if (name == "epoch" || (name.size() > 4 &&
                            name.compare(name.size() - 4, 4, "_std") == 0)) {
      continue;
    }
    sim.ids.push_back(name);
    sim.values.push_back(history.NumericColumn(name));
  }

  const CsvTable predicted = ReadCsv(predicted_csv);
  const std::vector<double> t = predicted.NumericColumn("t");
  const std::vector<double> value = predicted.NumericColumn("value");
  const std::size_t id_col = predicted.Column("id");
  CurveSet pred;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < predicted.rows.size(); ++i) {
    const std::string& id = predicted.rows[i][id_col];
    auto [it, inserted] = index.emplace(id, pred.ids.size());
    if (inserted) {
      pred.ids.push_back(id);
      pred.values.emplace_back();
    }
    if (it->second == 0) pred.times.push_back(t[i]);
    pred.values[it->second].push_back(value[i]);
  }
  for (const auto& v : pred.values) {
    if (v.size() != pred.times.size()) {
      throw ParameterError("predicted curves use different time grids");
    }
  }
  return Deviation(sim, pred);
}

}  // namespace modlin
