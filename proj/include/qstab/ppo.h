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

#ifndef QSTAB_PPO_H_
#define QSTAB_PPO_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "qstab/mlp.h"
#include "qstab/random.h"
#include "qstab/rl_env.h"

namespace qstab {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

struct GaussianPolicy {
  Mlp mean_net;
  Eigen::VectorXd log_std;  // state independent

  int action_size() const { return static_cast<int>(log_std.size()); }
  Eigen::VectorXd ClampedLogStd() const;
};

struct PolicyOutput {
  Eigen::VectorXd mean;
  Eigen::VectorXd log_std;
};

PolicyOutput ForwardPolicy(const GaussianPolicy& policy,
                           const Eigen::VectorXd& obs);

double GaussianLogProb(const Eigen::VectorXd& mean,
                       const Eigen::VectorXd& log_std,
                       const Eigen::VectorXd& action);

struct PolicySample {
  Eigen::VectorXd action;  // unclamped; the environment clamps
  double logp;
};

PolicySample SampleAction(const GaussianPolicy& policy,
                          const Eigen::VectorXd& obs, NoiseStream& noise);

// Mean action, used for evaluation.
Eigen::VectorXd DeterministicAction(const GaussianPolicy& policy,
                                    const Eigen::VectorXd& obs);

struct Agent {
  GaussianPolicy policy;
  Mlp value;  // scalar output
};

Agent MakeAgent(int obs_size, int action_size, const std::vector<int>& hidden,
                double init_log_std, std::uint64_t seed);

struct GaeResult {
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;  // advantages + values
};

// dones[t] marks that the episode ended after step t; last_value bootstraps
// a rollout that stops mid-episode.
GaeResult ComputeGae(std::span<const double> rewards,
                     std::span<const double> values,
                     std::span<const std::uint8_t> dones, double last_value,
                     double gamma, double lambda);

// Mean 0, unit sample standard deviation (plus a tiny floor).
void NormalizeAdvantages(Eigen::VectorXd& advantages);

double ClippedObjective(double ratio, double advantage, double clip);

struct Minibatch {
  Eigen::MatrixXd obs;      // obs_size x B
  Eigen::MatrixXd actions;  // action_size x B
  Eigen::VectorXd old_logp;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
};

struct LossCoefficients {
  double clip = 0.2;
  double vf_coef = 0.5;
  double ent_coef = 0.0;
};

struct LossTerms {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  int skipped = 0;  // samples with a non-finite ratio
};

struct AgentGradient {
  Eigen::VectorXd mean_net;
  Eigen::VectorXd log_std;
  Eigen::VectorXd value;

  static AgentGradient ZerosLike(const Agent& agent);
  double Norm() const;
  void Scale(double s);
};

// Clipped surrogate + value regression + entropy bonus. Fills `grad` (which
// must be zero-initialized) when non-null.
LossTerms PpoLoss(const Agent& agent, const Minibatch& batch,
                  const LossCoefficients& coef, AgentGradient* grad);

// Mean squared error of the value net against `targets` and its gradient.
double ValueLoss(const Mlp& value, const Eigen::MatrixXd& obs,
                 const Eigen::VectorXd& targets, Eigen::VectorXd* grad);

class Adam {
 public:
  Adam() = default;
  explicit Adam(int size, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-5);
  void Step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr);

  long steps() const { return t_; }

 private:
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-5;
  long t_ = 0;
  Eigen::VectorXd m_, v_;
};

// One gradient step of the value net toward `targets`.
double TdValueUpdate(Mlp& value, Adam& optimizer, const Eigen::MatrixXd& obs,
                     const Eigen::VectorXd& targets, double lr);

struct TrainConfig {
  long total_steps = 10'000'000;
  int num_envs = 8;
  int rollout_steps = 2048;  // per environment
  int minibatch_size = 256;
  int epochs = 10;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  double lr_start = 5e-7;
  double ent_coef = 0.0;
  double vf_coef = 0.5;
  double max_grad_norm = 0.5;
  std::vector<int> hidden = {128, 128};
  double init_log_std = 0.0;
  std::uint64_t seed = 0;

  void Validate() const;
};

double LearningRate(const TrainConfig& config, long step);

nlohmann::json ToJson(const TrainConfig& config);
TrainConfig TrainConfigFromJson(const nlohmann::json& j);

struct IterationLog {
  int iteration = 0;
  long steps = 0;  // environment steps collected so far
  double lr = 0.0;
  double mean_step_reward = 0.0;
  int episodes = 0;  // completed in this rollout
  // Over the last (up to) 100 completed episodes; NaN before the first.
  double mean_return = 0.0;
  double mean_final_metric = 0.0;
  double success_fraction = 0.0;
  LossTerms loss;  // averaged over the update's minibatches
};

nlohmann::json ToJson(const IterationLog& log);

using EnvFactory = std::function<std::unique_ptr<RlEnvironment>(int env_index)>;

struct TrainHooks {
  std::function<void(const IterationLog&)> on_iteration;
  // Where to write the diagnostic checkpoint if parameters go non-finite.
  std::string diagnostic_checkpoint;
  // Opaque caller metadata stored in checkpoints.
  nlohmann::json context;
  int workers = 1;
};

struct TrainResult {
  Agent agent;
  std::vector<IterationLog> log;
  long steps = 0;
};

// Throws TrajectoryDiverged after writing the diagnostic checkpoint when any
// parameter becomes non-finite.
TrainResult Train(const EnvFactory& make_env, const TrainConfig& config,
                  const TrainHooks& hooks = {});

inline constexpr int kCheckpointFormat = 1;

struct Checkpoint {
  TrainConfig config;
  Agent agent;
  long steps = 0;
  nlohmann::json context;
  nlohmann::json rng_state;
};

void SaveCheckpoint(const Checkpoint& ckpt, const std::string& path);
// Throws CheckpointError on unreadable, malformed or version-mismatched files.
Checkpoint LoadCheckpoint(const std::string& path);

}  // namespace qstab

#endif  // QSTAB_PPO_H_
