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


#ifndef QSTAB_CONFIG_H_
#define QSTAB_CONFIG_H_

// Experiment configuration: a YAML document validated against the system
// catalog with every default materialized on load. Errors carry the 1-based
// line of the offending node; unknown keys are rejected.
//
//   system: bell2q          # catalog name or an inline mapping
//   target: bell            # catalog state name or {re, im}
//   seed: 0
//   output_dir: runs
//   reward:        {variant, d, e, f, proximity, exploration, whole,
//                   step_penalty, step_penalty_unit}
//   episode:       {max_time, success_window, initial_state,
//                   terminate_on_success}
//   imperfections: {eta_c, delay_steps}
//   train:         {total_steps, num_envs, rollout_steps, minibatch_size,
//                   epochs, gamma, gae_lambda, clip, lr_start, ent_coef,
//                   vf_coef, max_grad_norm, hidden, init_log_std}
//   eval:          {n_initial_states, n_noise_realizations, t_max,
//                   success_threshold, success_window, initial_state,
//                   downsample, full_resolution}
//   baseline:      {gain, switch_fidelity, switch_drive}
//   ablate:        {budget_scale, variants}

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "qstab/baseline.h"
#include "qstab/bench.h"
#include "qstab/env.h"
#include "qstab/ppo.h"
#include "qstab/rewards.h"
#include "qstab/sme.h"

namespace qstab {

struct ExperimentConfig {
  // Catalog name, or "inline" for a system given as matrices.
  std::string system_name = "bell2q";
  SystemSpec system;  // eta_c already reflects the imperfections
  std::string target_name = "bell";  // catalog state name or "inline"
  DensityMatrix target = DensityMatrix::MaximallyMixed(1);
  RewardSpec reward;
  EpisodeConfig episode;
  // Textual initial-state selections, see ParseInitialStateArg.
  std::string train_initial_state = "haar_pure";
  std::string eval_initial_state = "haar_pure";
  double eta_c = 1.0;
  int delay_steps = 0;
  TrainConfig train;
  EvalProtocol eval;
  LyapunovConfig baseline;
  double budget_scale = 1.0;
  std::vector<RewardVariant> ablate_variants;
  std::string output_dir = "runs";
  std::uint64_t seed = 0;
};

// Throws ConfigError.
ExperimentConfig ParseExperimentConfig(const std::string& yaml_text);
ExperimentConfig LoadExperimentConfig(const std::string& path);

// Every field written out; parsing the result reproduces the config.
std::string ResolvedConfigYaml(const ExperimentConfig& config);

// Applies a new root seed to every seeded component.
void SetRootSeed(ExperimentConfig& config, std::uint64_t seed);

// "haar_pure", "random_diagonal" or "fixed:<catalog state>".
// Throws ContractViolation on unknown modes or states.
InitialStateSpec ParseInitialStateArg(const std::string& text);

// Environment factory for training on the configured task.
EnvFactory MakeEnvFactory(const ExperimentConfig& config);

}  // namespace qstab

#endif  // QSTAB_CONFIG_H_
