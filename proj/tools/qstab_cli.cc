// Copyright 2026 The qstab Authors
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


// Command-line entry point: train, eval, ablate, inspect-checkpoint and
// dump-system. Exit codes: 0 success, 1 configuration error, 2 runtime
// divergence, 3 incompatible checkpoint. QSTAB_WORKERS overrides the worker
// count.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qstab/bench.h"
#include "qstab/catalog.h"
#include "qstab/config.h"
#include "qstab/errors.h"
#include "qstab/parallel.h"
#include "qstab/ppo.h"

namespace fs = std::filesystem;

namespace qstab {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDiverged = 2;
constexpr int kExitCheckpoint = 3;

std::string Timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y%m%d-%H%M%S");
  return s.str();
}

// A fresh directory under `parent`; a numeric suffix avoids collisions.
fs::path MakeRunDirectory(const fs::path& parent, const std::string& stem) {
  fs::create_directories(parent);
  fs::path dir = parent / (Timestamp() + "-" + stem);
  for (int i = 1; fs::exists(dir); ++i) {
    dir = parent / (Timestamp() + "-" + stem + "-" + std::to_string(i));
  }
  fs::create_directories(dir);
  return dir;
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void WriteRunMetadata(const fs::path& dir, const ExperimentConfig& cfg) {
  WriteFile(dir / "config.yaml", ResolvedConfigYaml(cfg));
  WriteFile(dir / "VERSION", std::string(QSTAB_VERSION) + "\n");
}

nlohmann::json CheckpointContext(const ExperimentConfig& cfg) {
  return {{"config_yaml", ResolvedConfigYaml(cfg)},
          {"system", cfg.system_name},
          {"target", cfg.target_name},
          {"reward_variant", std::string(VariantName(cfg.reward.variant))},
          {"version", QSTAB_VERSION}};
}

// Trains and writes checkpoint.json and train_log.jsonl into `dir`.
TrainResult TrainInto(const ExperimentConfig& cfg, const fs::path& dir,
                      bool verbose) {
  std::ofstream log(dir / "train_log.jsonl");
  TrainHooks hooks;
  hooks.workers = DefaultWorkerCount();
  hooks.context = CheckpointContext(cfg);
  hooks.diagnostic_checkpoint = (dir / "diagnostic_checkpoint.json").string();
  hooks.on_iteration = [&](const IterationLog& it) {
    log << ToJson(it).dump() << '\n';
    log.flush();
    if (verbose) {
      std::cerr << "iter " << it.iteration << " steps " << it.steps
                << " return " << it.mean_return << " final_distance "
                << it.mean_final_metric << " success " << it.success_fraction
                << '\n';
    }
  };
  TrainResult result = Train(MakeEnvFactory(cfg), cfg.train, hooks);
  Checkpoint ckpt;
  ckpt.config = cfg.train;
  ckpt.agent = result.agent;
  ckpt.steps = result.steps;
  ckpt.context = hooks.context;
  ckpt.rng_state = {{"root_seed", cfg.seed},
                    {"streams", {"weight-init", "env-reset", "policy-sampling",
                                 "minibatch"}}};
  SaveCheckpoint(ckpt, (dir / "checkpoint.json").string());
  return result;
}

void WriteReport(const EvalReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  WriteFile(dir / "report.json", ToJson(report).dump(1) + "\n");
  std::ofstream traj(dir / "trajectories.csv");
  WriteTrajectoryCsv(report, traj);
  std::ofstream summary(dir / "summary.csv");
  WriteSummaryCsvHeader(summary);
  WriteSummaryCsvRow(report, summary);
  std::ofstream series(dir / "mean_series.txt");
  WriteMeanSeries(report, series);
}

std::string Describe(const EvalReport& r) {
  std::ostringstream s;
  s << r.controller << " on " << r.system;
  for (const std::string& t : r.tags) s << " [" << t << "]";
  s << ": trajectories " << r.trajectories.size() << ", success_rate "
    << r.success_rate << ", mean_time " << r.mean_time << " a.u. (+/- "
    << r.mean_time_stderr << "), mean_final_distance "
    << r.mean_final_distance << ", diverged " << r.diverged;
  return s.str();
}

// Throws CheckpointError unless the agent fits the system.
void CheckCompatible(const Checkpoint& ckpt, const SystemSpec& system) {
  const int obs = 2 * system.dim() * system.dim();
  const Mlp& net = ckpt.agent.policy.mean_net;
  if (net.input_size() != obs || net.output_size() != system.num_controls() ||
      ckpt.agent.value.input_size() != obs) {
    throw CheckpointError(
        "checkpoint expects observations of length " +
        std::to_string(net.input_size()) + " and " +
        std::to_string(net.output_size()) + " controls; system '" +
        system.name + "' has " + std::to_string(obs) + " and " +
        std::to_string(system.num_controls()));
  }
}

std::vector<double> ParseList(const std::string& text) {
  std::vector<double> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + item + "'");
    }
  }
  return out;
}

struct TrainArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<long> total_steps;
  std::string output_dir;
  std::string run_dir;
  bool quiet = false;
};

int CmdTrain(const TrainArgs& a) {
  ExperimentConfig cfg = LoadExperimentConfig(a.config);
  if (a.seed) SetRootSeed(cfg, *a.seed);
  if (a.total_steps) {
    cfg.train.total_steps = *a.total_steps;
    try {
      cfg.train.Validate();
    } catch (const ContractViolation& e) {
      throw ConfigError(e.what());
    }
  }
  if (!a.output_dir.empty()) cfg.output_dir = a.output_dir;
  fs::path dir;
  if (!a.run_dir.empty()) {
    dir = a.run_dir;
    fs::create_directories(dir);
  } else {
    dir = MakeRunDirectory(cfg.output_dir,
                           cfg.system.name + "-" +
                               std::string(VariantName(cfg.reward.variant)) +
                               "-seed" + std::to_string(cfg.seed));
  }
  WriteRunMetadata(dir, cfg);
  const TrainResult result = TrainInto(cfg, dir, !a.quiet);
  std::cout << "run_dir " << dir.string() << '\n'
            << "checkpoint " << (dir / "checkpoint.json").string() << '\n'
            << "steps " << result.steps << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::string checkpoint;
  std::string config;
  std::string system;
  std::string controller = "policy";
  std::optional<double> eta;
  std::optional<int> delay;
  std::string init;
  std::optional<int> initial_states;
  std::optional<int> noise;
  std::optional<double> t_max;
  std::optional<std::uint64_t> seed;
  std::optional<double> gain;
  std::string tune_gains;
  bool full_resolution = false;
  std::string out;
};

int CmdEval(const EvalArgs& a) {
  std::optional<Checkpoint> ckpt;
  ExperimentConfig cfg;
  if (!a.checkpoint.empty()) {
    ckpt = LoadCheckpoint(a.checkpoint);
    if (!ckpt->context.contains("config_yaml")) {
      throw CheckpointError("checkpoint carries no experiment config");
    }
    cfg = ParseExperimentConfig(ckpt->context["config_yaml"].get<std::string>());
  } else if (!a.config.empty()) {
    cfg = LoadExperimentConfig(a.config);
  } else {
    cfg = ParseExperimentConfig("system: " +
                                (a.system.empty() ? "bell2q" : a.system) + "\n");
  }
  if (!a.system.empty() && a.system != cfg.system_name) {
    // An explicit system replaces the stored one; the target follows it.
    ExperimentConfig other = ParseExperimentConfig("system: " + a.system + "\n");
    other.eval = cfg.eval;
    other.baseline.gain.assign(other.system.num_controls(),
                               cfg.baseline.gain.empty() ? 5.0
                                                         : cfg.baseline.gain[0]);
    cfg = std::move(other);
  }

  EvalProtocol p = cfg.eval;
  if (a.eta) p.eta_c = *a.eta;
  if (a.delay) p.delay_steps = *a.delay;
  if (!a.init.empty()) {
    try {
      p.initial_state = ParseInitialStateArg(a.init);
    } catch (const Error& e) {
      throw ConfigError(std::string("--init: ") + e.what());
    }
  }
  if (a.initial_states) p.n_initial_states = *a.initial_states;
  if (a.noise) p.n_noise_realizations = *a.noise;
  if (a.t_max) p.t_max = *a.t_max;
  if (a.seed) p.seed = *a.seed;
  if (a.full_resolution) p.full_resolution = true;
  try {
    p.Validate();
    if (p.initial_state.fixed &&
        p.initial_state.fixed->dim() != cfg.system.dim()) {
      throw ConfigError("--init state dimension does not match the system");
    }
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }

  const int workers = DefaultWorkerCount();
  Controller controller;
  std::optional<GainSearchResult> search;
  if (a.controller == "policy") {
    if (!ckpt) throw ConfigError("--controller policy needs --checkpoint");
    CheckCompatible(*ckpt, cfg.system);
    controller = PolicyController(ckpt->agent.policy);
  } else if (a.controller == "lyapunov") {
    LyapunovConfig lc = cfg.baseline;
    if (a.gain) lc.gain.assign(cfg.system.num_controls(), *a.gain);
    if (!a.tune_gains.empty()) {
      EvalProtocol tuning = p;
      tuning.seed = DeriveSeed(p.seed, "gain-search");
      tuning.n_initial_states = std::min(p.n_initial_states, 10);
      tuning.n_noise_realizations = std::min(p.n_noise_realizations, 10);
      search = TuneLyapunovGain(lc, cfg.system, cfg.target, cfg.target_name,
                                ParseList(a.tune_gains), tuning, workers);
      lc.gain.assign(cfg.system.num_controls(), search->gains[search->best]);
    }
    try {
      lc.Validate(cfg.system);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    controller = LyapunovController(lc, cfg.system, cfg.target);
  } else if (a.controller == "zero") {
    controller = ZeroController(cfg.system);
  } else {
    throw ConfigError("unknown controller '" + a.controller + "'");
  }

  const EvalReport report = EvaluateController(
      controller, cfg.system, cfg.target, cfg.target_name, p, workers);

  fs::path dir;
  if (!a.out.empty()) {
    dir = a.out;
  } else {
    std::string stem = "eval-" + a.controller;
    for (const std::string& t : report.tags) stem += "-" + t;
    const fs::path parent = ckpt ? fs::path(a.checkpoint).parent_path()
                                 : fs::path(cfg.output_dir);
    dir = MakeRunDirectory(parent.empty() ? fs::path(".") : parent, stem);
  }
  WriteReport(report, dir);
  if (search) {
    std::ofstream g(dir / "gain_search.csv");
    WriteGainSearchCsv(*search, g);
  }
  std::cout << Describe(report) << '\n' << "report_dir " << dir.string() << '\n';
  return kExitOk;
}

struct AblateArgs {
  std::string config;
  std::optional<double> budget_scale;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
  bool quiet = false;
};

int CmdAblate(const AblateArgs& a) {
  ExperimentConfig base = LoadExperimentConfig(a.config);
  if (a.seed) SetRootSeed(base, *a.seed);
  if (a.budget_scale) {
    if (!(*a.budget_scale > 0.0)) throw ConfigError("--budget-scale must be > 0");
    base.budget_scale = *a.budget_scale;
  }
  if (!a.output_dir.empty()) base.output_dir = a.output_dir;
  base.train.total_steps = std::max<long>(
      1, std::lround(static_cast<double>(base.train.total_steps) *
                     base.budget_scale));
  const fs::path dir =
      MakeRunDirectory(base.output_dir, "ablate-" + base.system.name);
  WriteRunMetadata(dir, base);

  std::vector<AblationRow> rows;
  std::ofstream summary(dir / "summary.csv");
  WriteSummaryCsvHeader(summary);
  for (RewardVariant v : base.ablate_variants) {
    ExperimentConfig cfg = base;
    cfg.reward = DefaultRewardSpec(v);
    if (base.reward.d != cfg.reward.d) cfg.reward.SetPartition(base.reward.d);
    AblationRow row = DescribeVariant(cfg.reward);
    const fs::path vdir = dir / std::string(VariantName(v));
    try {
      fs::create_directories(vdir);
      WriteRunMetadata(vdir, cfg);
      const TrainResult trained = TrainInto(cfg, vdir, !a.quiet);
      const EvalReport report = EvaluateController(
          PolicyController(trained.agent.policy), cfg.system, cfg.target,
          cfg.target_name, cfg.eval, DefaultWorkerCount());
      WriteReport(report, vdir / "eval");
      WriteSummaryCsvRow(report, summary);
      row.mean_time = report.mean_time;
      row.success_rate = report.success_rate;
      std::cerr << VariantName(v) << ": " << Describe(report) << '\n';
    } catch (const std::exception& e) {
      row.error = e.what();
      std::cerr << VariantName(v) << " failed: " << e.what() << '\n';
    }
    rows.push_back(row);
  }
  std::ofstream table(dir / "ablation.csv");
  WriteAblationCsv(rows, table);
  WriteAblationCsv(rows, std::cout);
  std::cout << "run_dir " << dir.string() << '\n';
  return kExitOk;
}

int CmdInspect(const std::string& path) {
  const Checkpoint c = LoadCheckpoint(path);
  nlohmann::json context = c.context;
  if (context.contains("config_yaml")) context.erase("config_yaml");
  const nlohmann::json out = {
      {"format", kCheckpointFormat},
      {"steps", c.steps},
      {"config", ToJson(c.config)},
      {"policy_sizes", c.agent.policy.mean_net.sizes()},
      {"value_sizes", c.agent.value.sizes()},
      {"log_std", std::vector<double>(c.agent.policy.log_std.data(),
                                      c.agent.policy.log_std.data() +
                                          c.agent.policy.log_std.size())},
      {"context", context},
      {"rng_state", c.rng_state}};
  std::cout << out.dump(2) << '\n';
  if (c.context.contains("config_yaml")) {
    std::cout << "# experiment config\n"
              << c.context["config_yaml"].get<std::string>();
  }
  return kExitOk;
}

int CmdDumpSystem(const std::string& name, const std::string& state) {
  if (!state.empty()) {
    DensityMatrix rho = DensityMatrix::MaximallyMixed(1);
    try {
      rho = CatalogState(state);
    } catch (const ContractViolation& e) {
      throw ConfigError(e.what());
    }
    std::cout << nlohmann::json{{"state", state},
                                {"matrix", MatrixToJson(rho.matrix())}}
                     .dump(2)
              << '\n';
    return kExitOk;
  }
  SystemCatalogEntry e = [&] {
    try {
      return CatalogEntry(name);
    } catch (const ContractViolation& err) {
      throw ConfigError(err.what());
    }
  }();
  std::cout << nlohmann::json{{"system", ToJson(e.system)},
                              {"target_name", e.target_name},
                              {"target", MatrixToJson(e.target.matrix())},
                              {"max_time", e.max_time}}
                   .dump(2)
            << '\n';
  return kExitOk;
}

int Run(int argc, char** argv) {
  CLI::App app{"Measurement-feedback stabilization of qubit systems"};
  app.require_subcommand(1);

  TrainArgs train;
  CLI::App* t = app.add_subcommand("train", "train a PPO agent");
  t->add_option("--config", train.config, "experiment config")->required();
  t->add_option("--seed", train.seed, "root seed override");
  t->add_option("--total-steps", train.total_steps, "training budget override");
  t->add_option("--output-dir", train.output_dir, "parent of the run dir");
  t->add_option("--run-dir", train.run_dir, "exact run directory");
  t->add_flag("--quiet", train.quiet, "no per-iteration progress");

  EvalArgs eval;
  CLI::App* e = app.add_subcommand("eval", "evaluate a controller");
  e->add_option("--checkpoint", eval.checkpoint, "trained agent");
  e->add_option("--config", eval.config, "experiment config");
  e->add_option("--system", eval.system, "catalog system");
  e->add_option("--controller", eval.controller, "policy, lyapunov or zero")
      ->check(CLI::IsMember({"policy", "lyapunov", "zero"}));
  e->add_option("--eta", eval.eta, "measurement efficiency");
  e->add_option("--delay", eval.delay, "observation delay in steps");
  e->add_option("--init", eval.init,
                "haar_pure, random_diagonal or fixed:<state>");
  e->add_option("--initial-states", eval.initial_states, "grid rows");
  e->add_option("--noise-realizations", eval.noise, "grid columns");
  e->add_option("--t-max", eval.t_max, "evaluation horizon");
  e->add_option("--seed", eval.seed, "protocol seed");
  e->add_option("--gain", eval.gain, "uniform Lyapunov gain");
  e->add_option("--tune-gains", eval.tune_gains,
                "comma-separated Lyapunov gains to search");
  e->add_flag("--full-resolution", eval.full_resolution,
              "keep every distance sample");
  e->add_option("--out", eval.out, "report directory");

  AblateArgs ablate;
  CLI::App* ab = app.add_subcommand("ablate", "train and compare all rewards");
  ab->add_option("--config", ablate.config, "experiment config")->required();
  ab->add_option("--budget-scale", ablate.budget_scale,
                 "multiplies train.total_steps");
  ab->add_option("--seed", ablate.seed, "root seed override");
  ab->add_option("--output-dir", ablate.output_dir, "parent of the run dir");
  ab->add_flag("--quiet", ablate.quiet, "no per-iteration progress");

  std::string inspect_path;
  CLI::App* in = app.add_subcommand("inspect-checkpoint", "describe a checkpoint");
  in->add_option("checkpoint", inspect_path, "checkpoint file")->required();

  std::string system_name = "bell2q", state_name;
  CLI::App* d = app.add_subcommand("dump-system", "print catalog matrices");
  d->add_option("system", system_name, "bell2q or ghz3q");
  d->add_option("--state", state_name, "print a named state instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*t) return CmdTrain(train);
    if (*e) return CmdEval(eval);
    if (*ab) return CmdAblate(ablate);
    if (*in) return CmdInspect(inspect_path);
    if (*d) return CmdDumpSystem(system_name, state_name);
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return kExitConfig;
  } catch (const CheckpointError& err) {
    std::cerr << "incompatible checkpoint: " << err.what() << '\n';
    return kExitCheckpoint;
  } catch (const TrajectoryDiverged& err) {
    std::cerr << "diverged: " << err.what() << '\n';
    return kExitDiverged;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace
}  // namespace qstab

int main(int argc, char** argv) { return qstab::Run(argc, argv); }
