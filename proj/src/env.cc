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

#include "qstab/env.h"

#include <cmath>
#include <string>

#include "json.hpp"
#include "qstab/errors.h"

namespace qstab {

Observation Encode(const DensityMatrix& rho) {
  const ComplexMatrix& m = rho.matrix();
  const long n = m.rows();
  Observation obs{Eigen::VectorXd(2 * n * n)};
  for (long r = 0; r < n; ++r) {
    for (long c = 0; c < n; ++c) {
      obs.values(r * n + c) = m(r, c).real();
      obs.values(n * n + r * n + c) = m(r, c).imag();
    }
  }
  return obs;
}

DensityMatrix Decode(const Observation& obs) {
  const long len = obs.values.size();
  const long n = std::lround(std::sqrt(static_cast<double>(len) / 2.0));
  if (n == 0 || 2 * n * n != len || n > kMaxDim) {
    throw DimensionError("observation length " + std::to_string(len) +
                         " is not 2n^2");
  }
  ComplexMatrix m(n, n);
  for (long r = 0; r < n; ++r) {
    for (long c = 0; c < n; ++c) {
      m(r, c) = Complex(obs.values(r * n + c), obs.values(n * n + r * n + c));
    }
  }
  return DensityMatrix::FromMatrix(m);
}

DensityMatrix SampleHaarPure(int dim, std::uint64_t seed) {
  NoiseStream gauss(seed);
  ComplexVector psi(dim);
  for (int i = 0; i < dim; ++i) {
    const double re = gauss.NextStandardNormal();
    const double im = gauss.NextStandardNormal();
    psi(i) = Complex(re, im);
  }
  return DensityMatrix::FromPureState(psi);
}

DensityMatrix SampleRandomDiagonal(int dim, std::uint64_t seed) {
  // Normalized exponentials are uniform on the simplex.
  NoiseStream uniform(seed);
  std::vector<double> p(dim);
  double total = 0.0;
  for (int i = 0; i < dim; ++i) {
    p[i] = -std::log(uniform.NextUniform());
    total += p[i];
  }
  for (double& x : p) x /= total;
  return DensityMatrix::FromMatrix(MakeDiagonal(p));
}

std::string_view InitialStateModeName(InitialStateMode mode) {
  switch (mode) {
    case InitialStateMode::kHaarPure: return "haar_pure";
    case InitialStateMode::kRandomDiagonal: return "random_diagonal";
    case InitialStateMode::kFixed: return "fixed";
  }
  return "?";
}

InitialStateMode ParseInitialStateMode(std::string_view name) {
  for (InitialStateMode m :
       {InitialStateMode::kHaarPure, InitialStateMode::kRandomDiagonal,
        InitialStateMode::kFixed}) {
    if (InitialStateModeName(m) == name) return m;
  }
  throw ContractViolation("unknown initial state mode: " + std::string(name));
}

DensityMatrix SampleInitialState(const InitialStateSpec& spec, int dim,
                                 std::uint64_t seed) {
  switch (spec.mode) {
    case InitialStateMode::kHaarPure:
      return SampleHaarPure(dim, seed);
    case InitialStateMode::kRandomDiagonal:
      return SampleRandomDiagonal(dim, seed);
    case InitialStateMode::kFixed:
      if (!spec.fixed) throw ContractViolation("fixed initial state missing");
      if (spec.fixed->dim() != dim) {
        throw DimensionError("fixed initial state has wrong dimension");
      }
      return *spec.fixed;
  }
  throw ContractViolation("unknown initial state mode");
}

int EpisodeConfig::MaxSteps() const {
  return static_cast<int>(std::lround(max_time / dt));
}

void EpisodeConfig::Validate() const {
  if (!(dt > 0.0)) throw ContractViolation("episode: dt must be > 0");
  if (!(max_time > 0.0)) throw ContractViolation("episode: max_time must be > 0");
  const double steps = max_time / dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
    throw ContractViolation("episode: max_time/dt must be integral");
  }
  if (success_window < 1) {
    throw ContractViolation("episode: success_window must be >= 1");
  }
  if (!(partition_d > 0.0 && partition_d < 1.0)) {
    throw ContractViolation("episode: partition_d must be in (0, 1)");
  }
  if (delay_steps < 0) throw ContractViolation("episode: delay_steps < 0");
  if (initial_state.mode == InitialStateMode::kFixed && !initial_state.fixed) {
    throw ContractViolation("episode: fixed initial state missing");
  }
}

std::string_view TerminationName(TerminationReason r) {
  switch (r) {
    case TerminationReason::kNone: return "none";
    case TerminationReason::kSuccess: return "success";
    case TerminationReason::kTimeout: return "timeout";
    case TerminationReason::kDiverged: return "diverged";
  }
  return "?";
}

Environment::Environment(SystemSpec system, DensityMatrix target,
                         EpisodeConfig config, RewardSpec reward)
    : system_(std::move(system)),
      target_(std::move(target)),
      config_(std::move(config)),
      reward_(std::move(reward)) {
  system_.Validate();
  config_.Validate();
  reward_.Validate();
  if (std::abs(config_.dt - system_.dt) > 1e-15) {
    throw ContractViolation("episode dt differs from the system dt");
  }
  if (target_.dim() != system_.dim()) {
    throw DimensionError("target dimension does not match the system");
  }
  if (!IsPure(target_)) throw ContractViolation("target state must be pure");
}

Observation Environment::Reset(std::uint64_t seed) {
  const DensityMatrix rho0 = SampleInitialState(
      config_.initial_state, system_.dim(), DeriveSeed(seed, "initial-state"));
  return ResetTo(rho0, DeriveSeed(seed, "sme-noise"));
}

Observation Environment::ResetTo(const DensityMatrix& rho0,
                                 std::uint64_t noise_seed) {
  if (rho0.dim() != system_.dim()) {
    throw DimensionError("initial state has wrong dimension");
  }
  state_ = rho0;
  delay_.assign(static_cast<std::size_t>(config_.delay_steps) + 1, rho0);
  noise_ = NoiseStream(noise_seed);
  step_ = 0;
  distance_ = TraceDistanceToTarget(target_, rho0);
  in_zone_run_ = 0;
  done_ = false;
  return Encode(rho0);
}

Transition Environment::Step(std::span<const double> action) {
  if (done_) throw UsageError("step() called on a finished episode");
  Transition t;
  t.obs = Encode(observed_state());
  t.action = ClampActions(system_, action);

  std::optional<StepOutcome> outcome;
  try {
    outcome.emplace(SmeStep(system_, *state_, t.action, noise_));
  } catch (const TrajectoryDiverged&) {
    ++step_;
    done_ = true;
    t.reward = FloorReward(reward_);
    t.next_obs = t.obs;
    t.done = true;
    t.reason = TerminationReason::kDiverged;
    t.step_index = step_;
    t.distance = distance_;
    return t;
  }

  ++step_;
  state_ = std::move(outcome->next_state);
  distance_ = TraceDistanceToTarget(target_, *state_);
  in_zone_run_ = distance_ <= config_.partition_d ? in_zone_run_ + 1 : 0;
  delay_.pop_front();
  delay_.push_back(*state_);

  t.reward = EvaluateReward(reward_, distance_, step_);
  t.next_obs = Encode(observed_state());
  t.step_index = step_;
  t.distance = distance_;
  t.dy = outcome->dy;
  t.projected = outcome->projected;
  if (config_.terminate_on_success && in_zone_run_ >= config_.success_window) {
    t.reason = TerminationReason::kSuccess;
  } else if (step_ >= config_.MaxSteps()) {
    t.reason = TerminationReason::kTimeout;
  }
  t.done = t.reason != TerminationReason::kNone;
  done_ = t.done;
  return t;
}

Eigen::VectorXd QuantumRlEnvironment::Reset(std::uint64_t seed) {
  return env_.Reset(seed).values;
}

EnvStep QuantumRlEnvironment::Step(std::span<const double> action) {
  Transition t = env_.Step(action);
  EnvStep out;
  out.obs = std::move(t.next_obs.values);
  out.reward = t.reward;
  out.done = t.done;
  out.truncated = t.reason == TerminationReason::kTimeout;
  out.success = t.reason == TerminationReason::kSuccess;
  out.final_metric = t.distance;
  return out;
}

void TransitionWriter::Write(const Transition& t, double dt) {
  nlohmann::json j;
  j["step"] = t.step_index;
  j["t"] = t.step_index * dt;
  j["action"] = t.action;
  j["reward"] = t.reward;
  j["distance"] = t.distance;
  j["dy"] = t.dy;
  j["projected"] = t.projected;
  j["done"] = t.done;
  j["reason"] = TerminationName(t.reason);
  out_ << j.dump() << '\n';
}

}  // namespace qstab
