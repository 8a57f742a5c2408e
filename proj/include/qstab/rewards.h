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

#ifndef QSTAB_REWARDS_H_
#define QSTAB_REWARDS_H_

// Distance-based reward functions: the partitioned nonlinear reward and the
// seven comparison designs used in the reward ablation.

#include <map>
#include <string>
#include <string_view>

namespace qstab {

enum class RewardVariant { kPNR, kPNR1, kPLR, kPSR, kNPNR, kNPLNR, kNPLPR, kFPR };

inline constexpr RewardVariant kAllRewardVariants[] = {
    RewardVariant::kPNR,  RewardVariant::kPNR1,  RewardVariant::kPLR,
    RewardVariant::kPSR,  RewardVariant::kNPNR,  RewardVariant::kNPLNR,
    RewardVariant::kNPLPR, RewardVariant::kFPR};

std::string_view VariantName(RewardVariant v);
// Case-insensitive. Throws ContractViolation on unknown names.
RewardVariant ParseVariant(std::string_view name);

// Distance interval [d_low, d_high] mapped onto rewards [r_low, r_high];
// r(d_low) = r_high and r(d_high) = r_low.
struct ZoneBounds {
  double d_low;
  double d_high;
  double r_low;
  double r_high;
};

struct RewardSpec {
  RewardVariant variant = RewardVariant::kPNR;
  // Partition: proximity zone is D < d, exploration zone D >= d.
  double d = 0.001;
  ZoneBounds proximity{0.0, 0.001, 1.0, 100.0};
  ZoneBounds exploration{0.001, 1.0, -0.1, 0.0};
  // Used by the non-partitioned variants.
  ZoneBounds whole{0.0, 1.0, -1.0, 0.0};
  double e = 2.0;
  double f = 10.0;
  bool step_penalty = true;
  double step_penalty_unit = 1e-6;

  bool partitioned() const;
  // Moves the partition to `new_d`, updating both zone bounds.
  void SetPartition(double new_d);
  // "Nonlinear", "Linear", "Sparse" or "Fidelity-Based".
  std::string_view form() const;
  // Throws ContractViolation on broken invariants.
  void Validate() const;
};

// Inverse-proportional zone reward. Requires D in [d_low, d_high] and e != f.
double PnrCore(double distance, const ZoneBounds& zone, double e, double f);

// Straight line from r_high at d_low to r_low at d_high.
double LinearZone(double distance, const ZoneBounds& zone);

// Reward for a state at trace distance `distance` reached on step
// `step_index` (1 for the first step).
double EvaluateReward(const RewardSpec& spec, double distance, int step_index);

// Reward assigned when a trajectory diverges: the lowest value the variant
// can produce, ignoring the step penalty.
double FloorReward(const RewardSpec& spec);

// The eight ablation configurations with their reference parameters.
std::map<RewardVariant, RewardSpec> DefaultRewardSpecs();
RewardSpec DefaultRewardSpec(RewardVariant v);

}  // namespace qstab

#endif  // QSTAB_REWARDS_H_
