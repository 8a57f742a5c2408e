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

#ifndef QSTAB_RL_ENV_H_
#define QSTAB_RL_ENV_H_

#include <cstdint>
#include <span>

#include <Eigen/Core>

namespace qstab {

// What the learner sees after one environment step.
struct EnvStep {
  Eigen::VectorXd obs;
  double reward = 0.0;
  bool done = false;
  // Episode hit its time limit; the learner bootstraps from `obs`.
  bool truncated = false;
  bool success = false;
  // Task-specific progress measure reported in training logs.
  double final_metric = 0.0;
};

// Minimal episodic interface the PPO learner trains against.
class RlEnvironment {
 public:
  virtual ~RlEnvironment() = default;
  virtual int observation_size() const = 0;
  virtual int action_size() const = 0;
  virtual Eigen::VectorXd Reset(std::uint64_t seed) = 0;
  virtual EnvStep Step(std::span<const double> action) = 0;
};

}  // namespace qstab

#endif  // QSTAB_RL_ENV_H_
