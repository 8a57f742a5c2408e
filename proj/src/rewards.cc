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

#include "qstab/rewards.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "qstab/errors.h"

namespace qstab {
namespace {

void ValidateZone(const ZoneBounds& z, const char* which) {
  if (!(z.d_low < z.d_high)) {
    throw ContractViolation(std::string(which) + ": needs d_low < d_high");
  }
  if (!(z.r_low <= z.r_high)) {
    throw ContractViolation(std::string(which) + ": needs r_low <= r_high");
  }
}

}  // namespace

std::string_view VariantName(RewardVariant v) {
  switch (v) {
    case RewardVariant::kPNR: return "PNR";
    case RewardVariant::kPNR1: return "PNR1";
    case RewardVariant::kPLR: return "PLR";
    case RewardVariant::kPSR: return "PSR";
    case RewardVariant::kNPNR: return "NPNR";
    case RewardVariant::kNPLNR: return "NPLNR";
    case RewardVariant::kNPLPR: return "NPLPR";
    case RewardVariant::kFPR: return "FPR";
  }
  return "?";
}

RewardVariant ParseVariant(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char ch) { return std::toupper(ch); });
  for (RewardVariant v : kAllRewardVariants) {
    if (VariantName(v) == upper) return v;
  }
  throw ContractViolation("unknown reward variant '" + std::string(name) + "'");
}

bool RewardSpec::partitioned() const {
  switch (variant) {
    case RewardVariant::kPNR:
    case RewardVariant::kPNR1:
    case RewardVariant::kPLR:
    case RewardVariant::kPSR:
      return true;
    default:
      return false;
  }
}

std::string_view RewardSpec::form() const {
  switch (variant) {
    case RewardVariant::kPNR:
    case RewardVariant::kPNR1:
    case RewardVariant::kNPNR:
      return "Nonlinear";
    case RewardVariant::kPLR:
    case RewardVariant::kNPLNR:
    case RewardVariant::kNPLPR:
      return "Linear";
    case RewardVariant::kPSR:
      return "Sparse";
    case RewardVariant::kFPR:
      return "Fidelity-Based";
  }
  return "?";
}

void RewardSpec::SetPartition(double new_d) {
  d = new_d;
  proximity.d_high = new_d;
  exploration.d_low = new_d;
}

void RewardSpec::Validate() const {
  if (!(d > 0.0 && d < 1.0)) throw ContractViolation("reward: d must be in (0,1)");
  if (partitioned() && variant != RewardVariant::kPSR &&
      (proximity.d_high != d || exploration.d_low != d)) {
    throw ContractViolation("reward: zone bounds must meet at d");
  }
  ValidateZone(proximity, "proximity zone");
  ValidateZone(exploration, "exploration zone");
  ValidateZone(whole, "non-partitioned range");
  const bool nonlinear = variant == RewardVariant::kPNR ||
                         variant == RewardVariant::kPNR1 ||
                         variant == RewardVariant::kNPNR;
  if (nonlinear) {
    if (!(e > 0.0 && f > 0.0)) {
      throw ContractViolation("reward: slopes e and f must be positive");
    }
    if (e == f) throw ContractViolation("reward: e == f divides by zero");
  }
  if (!(step_penalty_unit >= 0.0)) {
    throw ContractViolation("reward: step_penalty_unit must be >= 0");
  }
}

double PnrCore(double distance, const ZoneBounds& zone, double e, double f) {
  if (!(distance >= zone.d_low && distance <= zone.d_high)) {
    throw ContractViolation("PnrCore: distance " + std::to_string(distance) +
                            " outside zone [" + std::to_string(zone.d_low) +
                            ", " + std::to_string(zone.d_high) + "]");
  }
  if (e == f) throw ContractViolation("PnrCore: e == f");
  // Pin the endpoints exactly; the closed form reaches them only up to
  // rounding.
  if (distance == zone.d_low) return zone.r_high;
  if (distance == zone.d_high) return zone.r_low;
  const double span = zone.d_high - zone.d_low;
  const double denom =
      f * (distance - zone.d_low) - e * (distance - zone.d_high);
  return (span / denom - 1.0 / f) * (e * f * (zone.r_high - zone.r_low) / (f - e)) +
         zone.r_low;
}

double LinearZone(double distance, const ZoneBounds& zone) {
  if (distance == zone.d_low) return zone.r_high;
  if (distance == zone.d_high) return zone.r_low;
  const double frac = (distance - zone.d_low) / (zone.d_high - zone.d_low);
  return zone.r_high - frac * (zone.r_high - zone.r_low);
}

double EvaluateReward(const RewardSpec& spec, double distance, int step_index) {
  if (!(distance >= 0.0 && distance <= 1.0)) {
    throw ContractViolation("reward: distance " + std::to_string(distance) +
                            " outside [0, 1]");
  }
  const bool near = distance < spec.d;
  double r = 0.0;
  switch (spec.variant) {
    case RewardVariant::kPNR:
    case RewardVariant::kPNR1:
      r = near ? PnrCore(distance, spec.proximity, spec.e, spec.f)
               : PnrCore(distance, spec.exploration, spec.e, spec.f);
      break;
    case RewardVariant::kPLR:
      r = near ? LinearZone(distance, spec.proximity)
               : LinearZone(distance, spec.exploration);
      break;
    case RewardVariant::kPSR:
      r = near ? spec.proximity.r_high : spec.exploration.r_high;
      break;
    case RewardVariant::kNPNR:
      r = PnrCore(distance, spec.whole, spec.e, spec.f);
      break;
    case RewardVariant::kNPLNR:
    case RewardVariant::kNPLPR:
      r = LinearZone(distance, spec.whole);
      break;
    case RewardVariant::kFPR: {
      const double fidelity = 1.0 - distance;
      r = std::pow(fidelity, 4) + 4.0 * std::pow(fidelity, 25);
      break;
    }
  }
  if (spec.step_penalty) {
    r -= static_cast<double>(step_index) * spec.step_penalty_unit;
  }
  return r;
}

double FloorReward(const RewardSpec& spec) {
  switch (spec.variant) {
    case RewardVariant::kPNR:
    case RewardVariant::kPNR1:
    case RewardVariant::kPLR:
      return spec.exploration.r_low;
    case RewardVariant::kPSR:
      return std::min(spec.exploration.r_high, spec.proximity.r_high);
    case RewardVariant::kNPNR:
    case RewardVariant::kNPLNR:
    case RewardVariant::kNPLPR:
      return spec.whole.r_low;
    case RewardVariant::kFPR:
      return 0.0;
  }
  return 0.0;
}

RewardSpec DefaultRewardSpec(RewardVariant v) {
  RewardSpec s;  // PNR defaults
  s.variant = v;
  switch (v) {
    case RewardVariant::kPNR:
      break;
    case RewardVariant::kPNR1:
      s.e = 10.0;
      s.f = 2.0;
      break;
    case RewardVariant::kPLR:
      break;
    case RewardVariant::kPSR:
      s.proximity.r_low = s.proximity.r_high = 1.0;
      s.exploration.r_low = s.exploration.r_high = 0.0;
      s.step_penalty = false;
      break;
    case RewardVariant::kNPNR:
    case RewardVariant::kNPLNR:
      s.whole = {0.0, 1.0, -1.0, 0.0};
      s.step_penalty = false;
      break;
    case RewardVariant::kNPLPR:
      s.whole = {0.0, 1.0, 0.0, 100.0};
      s.step_penalty = false;
      break;
    case RewardVariant::kFPR:
      s.step_penalty = false;
      break;
  }
  return s;
}

std::map<RewardVariant, RewardSpec> DefaultRewardSpecs() {
  std::map<RewardVariant, RewardSpec> out;
  for (RewardVariant v : kAllRewardVariants) out.emplace(v, DefaultRewardSpec(v));
  return out;
}

}  // namespace qstab
