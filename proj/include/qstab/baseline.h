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


#ifndef QSTAB_BASELINE_H_
#define QSTAB_BASELINE_H_

// Reconstructed Lyapunov feedback law used as the comparison controller.
// With V(rho) = 1 - Tr(rho_d rho), channel j of the control contributes
// u_j * Im Tr(rho_d [H_j, rho]) to dTr(rho_d rho)/dt, so
//
//   u_j = clamp(K_j * Im Tr(rho_d [H_j, rho]))
//
// never makes the instantaneous drift of V worse than u = 0. The switching
// variant replaces the law by a constant drive while Tr(rho_d rho) is below
// a threshold, to leave invariant sets on which the gradient vanishes.

#include <string>
#include <vector>

#include "qstab/qmat.h"
#include "qstab/sme.h"

namespace qstab {

inline constexpr const char* kLyapunovLabel = "lyapunov (reconstructed baseline)";

struct LyapunovConfig {
  std::vector<double> gain;  // one K_j > 0 per control channel
  // Switching is active when switch_fidelity > 0.
  double switch_fidelity = 0.0;
  std::vector<double> switch_drive;  // one entry per channel when switching

  // Throws ContractViolation on a broken invariant or DimensionError when
  // the channel counts disagree with `system`.
  void Validate(const SystemSpec& system) const;
};

// Uniform gain K on every channel, no switching.
LyapunovConfig UniformLyapunovConfig(const SystemSpec& system, double gain);

// Im Tr(rho_d [H_j, rho]) for every control channel.
std::vector<double> LyapunovGradient(const SystemSpec& system,
                                     const DensityMatrix& target,
                                     const DensityMatrix& rho);

// Output always lies within the system's action bounds.
std::vector<double> LyapunovControl(const LyapunovConfig& config,
                                    const SystemSpec& system,
                                    const DensityMatrix& target,
                                    const DensityMatrix& rho);

}  // namespace qstab

#endif  // QSTAB_BASELINE_H_
