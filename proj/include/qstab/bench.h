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


#ifndef QSTAB_BENCH_H_
#define QSTAB_BENCH_H_

// Evaluation harness: a grid of initial states times noise realizations,
// stabilization-time and success-rate metrics, report comparison, and
// the reward-ablation table.

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qstab/baseline.h"
#include "qstab/env.h"
#include "qstab/ppo.h"
#include "qstab/rewards.h"
#include "qstab/sme.h"

namespace qstab {

struct EvalProtocol {
  int n_initial_states = 50;
  int n_noise_realizations = 50;
  double t_max = 100.0;
  double success_threshold = 0.001;
  int success_window = 10;
  InitialStateSpec initial_state;
  // Imperfections; unset leaves the system's own efficiency.
  std::optional<double> eta_c;
  int delay_steps = 0;
  // Reports keep every downsample-th distance sample unless full_resolution.
  int downsample = 10;
  bool full_resolution = false;
  std::uint64_t seed = 0;

  int GridSize() const { return n_initial_states * n_noise_realizations; }
  // Throws ContractViolation on broken invariants.
  void Validate() const;
  // "eta=0.8", "delay=0.05" and similar labels for non-ideal settings.
  std::vector<std::string> Tags(double dt) const;
};

nlohmann::json ToJson(const EvalProtocol& p);
EvalProtocol EvalProtocolFromJson(const nlohmann::json& j);

// Maps the observed state to an action. Must be safe to call concurrently.
struct Controller {
  std::string label;
  std::function<std::vector<double>(const DensityMatrix& observed)> act;
};

Controller ZeroController(const SystemSpec& system);
Controller LyapunovController(const LyapunovConfig& config,
                              const SystemSpec& system,
                              const DensityMatrix& target);
// Deterministic mean action; the policy is copied into the controller.
Controller PolicyController(const GaussianPolicy& policy);

// curve[k] is the distance at time k*dt. Returns the first k*dt from which
// `window` consecutive samples are <= d, or t_max when there is none.
// Throws ContractViolation on an empty curve.
double StabilizationTime(const std::vector<double>& curve, double d,
                         int window, double dt, double t_max);

struct TrajectoryResult {
  int initial_index = 0;
  int noise_index = 0;
  double stabilization_time = 0.0;
  bool success = false;
  double final_distance = 0.0;
  bool diverged = false;
  std::vector<double> curve;  // downsampled unless full_resolution
};

struct EvalReport {
  std::string controller;
  std::string system;
  std::string target;
  EvalProtocol protocol;
  std::vector<std::string> tags;
  double dt = 0.0;
  // Time between consecutive curve samples.
  double curve_dt = 0.0;

  std::vector<TrajectoryResult> trajectories;
  // Non-convergent trajectories count as t_max.
  double mean_time = 0.0;
  double mean_time_stderr = 0.0;
  double success_rate = 0.0;
  double mean_final_distance = 0.0;
  int diverged = 0;
  std::vector<std::vector<double>> mean_curve_per_state;
  std::vector<double> grand_mean_curve;
};

// Runs the full grid on `workers` threads; the report depends only on the
// arguments, never on the worker count.
EvalReport EvaluateController(const Controller& controller,
                              const SystemSpec& system,
                              const DensityMatrix& target,
                              const std::string& target_name,
                              const EvalProtocol& protocol, int workers);

struct ReportComparison {
  // (b - a) / b: positive when a stabilizes faster than b.
  double relative_time_reduction = 0.0;
  double success_rate_delta = 0.0;  // a - b
  bool protocols_match = true;
  std::vector<std::string> mismatches;
};

ReportComparison CompareReports(const EvalReport& a, const EvalReport& b);

nlohmann::json ToJson(const ReportComparison& c);
// Metadata, aggregates, per-state and grand mean curves, and trajectories.
nlohmann::json ToJson(const EvalReport& report);

// One row per trajectory.
void WriteTrajectoryCsv(const EvalReport& report, std::ostream& out);
void WriteSummaryCsvHeader(std::ostream& out);
// One summary row per report.
void WriteSummaryCsvRow(const EvalReport& report, std::ostream& out);
// "t mean_distance" lines of the grand mean curve.
void WriteMeanSeries(const EvalReport& report, std::ostream& out);

struct GainSearchResult {
  std::vector<double> gains;
  std::vector<EvalReport> reports;
  std::size_t best = 0;
};

// Evaluates the Lyapunov law with every uniform gain in `gains` (other
// settings from `base`) and picks the lowest mean time, breaking ties by
// success rate and then mean final distance.
GainSearchResult TuneLyapunovGain(const LyapunovConfig& base,
                                  const SystemSpec& system,
                                  const DensityMatrix& target,
                                  const std::string& target_name,
                                  const std::vector<double>& gains,
                                  const EvalProtocol& protocol, int workers);
// gain,mean_time,success_rate,mean_final_distance,selected
void WriteGainSearchCsv(const GainSearchResult& result, std::ostream& out);

struct AblationRow {
  RewardVariant variant = RewardVariant::kPNR;
  bool partitioned = false;
  std::string slopes;        // "e=2, f=10" or "-"
  std::string form;          // Nonlinear, Linear, Sparse, Fidelity-Based
  std::string zone_rewards;  // e.g. "PZ [1, 100]; EZ [-0.1, 0]"
  double mean_time = 0.0;
  double success_rate = 0.0;
  // Set when training or evaluation failed; the metrics are then NaN.
  std::string error;
};

// Descriptive columns from the reward configuration, metrics left NaN.
AblationRow DescribeVariant(const RewardSpec& spec);
void WriteAblationCsv(const std::vector<AblationRow>& rows, std::ostream& out);

}  // namespace qstab

#endif  // QSTAB_BENCH_H_
