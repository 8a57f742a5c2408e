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

#ifndef QSTAB_ENV_H_
#define QSTAB_ENV_H_

// The feedback-control MDP: an SME-driven quantum system whose density
// matrix is flattened into the agent's observation, with early termination
// and an optional observation delay.

#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "qstab/qmat.h"
#include "qstab/random.h"
#include "qstab/rewards.h"
#include "qstab/rl_env.h"
#include "qstab/sme.h"

namespace qstab {

// Row-major real parts followed by row-major imaginary parts; length 2n^2.
struct Observation {
  Eigen::VectorXd values;
};

Observation Encode(const DensityMatrix& rho);
// Throws DimensionError when the length is not 2n^2 and ContractViolation
// when the decoded matrix is not a physical state.
DensityMatrix Decode(const Observation& obs);

enum class InitialStateMode { kHaarPure, kRandomDiagonal, kFixed };
// "haar_pure", "random_diagonal", "fixed".
std::string_view InitialStateModeName(InitialStateMode mode);
// Throws ContractViolation on unknown names.
InitialStateMode ParseInitialStateMode(std::string_view name);

struct InitialStateSpec {
  InitialStateMode mode = InitialStateMode::kHaarPure;
  std::optional<DensityMatrix> fixed;  // required for kFixed
};

// |psi><psi| with psi a normalized complex Gaussian vector.
DensityMatrix SampleHaarPure(int dim, std::uint64_t seed);
// Diagonal state with populations drawn uniformly from the simplex.
DensityMatrix SampleRandomDiagonal(int dim, std::uint64_t seed);
DensityMatrix SampleInitialState(const InitialStateSpec& spec, int dim,
                                 std::uint64_t seed);

struct EpisodeConfig {
  double max_time = 20.0;
  double dt = 0.001;
  // Consecutive steps with distance <= partition_d that end an episode.
  int success_window = 10;
  double partition_d = 0.001;
  int delay_steps = 0;
  InitialStateSpec initial_state;
  // Evaluation runs keep integrating after success to record full curves.
  bool terminate_on_success = true;

  int MaxSteps() const;
  void Validate() const;
};

enum class TerminationReason { kNone, kSuccess, kTimeout, kDiverged };
std::string_view TerminationName(TerminationReason r);

struct Transition {
  Observation obs;
  std::vector<double> action;  // clamped amplitudes actually applied
  double reward = 0.0;
  Observation next_obs;
  bool done = false;
  TerminationReason reason = TerminationReason::kNone;
  int step_index = 0;  // 1 for the first step
  double distance = 0.0;  // true state after the step
  double dy = 0.0;
  bool projected = false;
};

class Environment {
 public:
  Environment(SystemSpec system, DensityMatrix target, EpisodeConfig config,
              RewardSpec reward);

  // Samples rho_0 per the configured mode; noise and initial state come
  // from independent streams derived from `seed`.
  Observation Reset(std::uint64_t seed);
  // Starts from an explicit rho_0 with the given SME noise seed.
  Observation ResetTo(const DensityMatrix& rho0, std::uint64_t noise_seed);

  // Throws UsageError when the episode has finished.
  Transition Step(std::span<const double> action);

  const SystemSpec& system() const { return system_; }
  const DensityMatrix& target() const { return target_; }
  const EpisodeConfig& config() const { return config_; }
  const RewardSpec& reward_spec() const { return reward_; }

  const DensityMatrix& true_state() const { return *state_; }
  // The state the agent sees: delay_steps behind the true state.
  const DensityMatrix& observed_state() const { return delay_.front(); }
  double distance() const { return distance_; }
  int step_index() const { return step_; }
  double time() const { return step_ * config_.dt; }
  bool done() const { return done_; }

  int observation_size() const { return 2 * system_.dim() * system_.dim(); }
  int action_size() const { return system_.num_controls(); }

 private:
  SystemSpec system_;
  DensityMatrix target_;
  EpisodeConfig config_;
  RewardSpec reward_;

  std::optional<DensityMatrix> state_;
  std::deque<DensityMatrix> delay_;
  NoiseStream noise_;
  int step_ = 0;
  int in_zone_run_ = 0;
  double distance_ = 1.0;
  bool done_ = true;
};

// Adapts Environment to the learner's interface.
class QuantumRlEnvironment : public RlEnvironment {
 public:
  explicit QuantumRlEnvironment(Environment env) : env_(std::move(env)) {}

  int observation_size() const override { return env_.observation_size(); }
  int action_size() const override { return env_.action_size(); }
  Eigen::VectorXd Reset(std::uint64_t seed) override;
  EnvStep Step(std::span<const double> action) override;

  const Environment& environment() const { return env_; }

 private:
  Environment env_;
};

// Line-delimited JSON transition log.
class TransitionWriter {
 public:
  explicit TransitionWriter(std::ostream& out) : out_(out) {}
  void Write(const Transition& t, double dt);

 private:
  std::ostream& out_;
};

}  // namespace qstab

#endif  // QSTAB_ENV_H_
