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


#include "qstab/baseline.h"

#include <cmath>
#include <string>

#include "qstab/errors.h"

namespace qstab {

void LyapunovConfig::Validate(const SystemSpec& system) const {
  const auto channels = static_cast<std::size_t>(system.num_controls());
  if (gain.size() != channels) {
    throw DimensionError("lyapunov: expected " + std::to_string(channels) +
                         " gains, got " + std::to_string(gain.size()));
  }
  for (double k : gain) {
    if (!std::isfinite(k) || !(k > 0.0)) {
      throw ContractViolation("lyapunov: gains must be finite and > 0");
    }
  }
  if (!std::isfinite(switch_fidelity) || switch_fidelity < 0.0 ||
      switch_fidelity > 1.0) {
    throw ContractViolation("lyapunov: switch_fidelity must lie in [0, 1]");
  }
  if (switch_fidelity > 0.0) {
    if (switch_drive.size() != channels) {
      throw DimensionError("lyapunov: switch_drive needs " +
                           std::to_string(channels) + " entries");
    }
    for (double v : switch_drive) {
      if (!std::isfinite(v)) {
        throw ContractViolation("lyapunov: switch_drive must be finite");
      }
    }
  }
}

LyapunovConfig UniformLyapunovConfig(const SystemSpec& system, double gain) {
  LyapunovConfig c;
  c.gain.assign(static_cast<std::size_t>(system.num_controls()), gain);
  return c;
}

std::vector<double> LyapunovGradient(const SystemSpec& system,
                                     const DensityMatrix& target,
                                     const DensityMatrix& rho) {
  if (target.dim() != rho.dim() || system.dim() != rho.dim()) {
    throw DimensionError("lyapunov: state and system dimensions differ");
  }
  std::vector<double> g(static_cast<std::size_t>(system.num_controls()));
  for (std::size_t j = 0; j < g.size(); ++j) {
    const ComplexMatrix comm = Commutator(system.controls[j], rho.matrix());
    g[j] = (target.matrix() * comm).trace().imag();
  }
  return g;
}

std::vector<double> LyapunovControl(const LyapunovConfig& config,
                                    const SystemSpec& system,
                                    const DensityMatrix& target,
                                    const DensityMatrix& rho) {
  config.Validate(system);
  if (config.switch_fidelity > 0.0) {
    const double fidelity = RealTraceOfProduct(target.matrix(), rho.matrix());
    if (fidelity < config.switch_fidelity) {
      return ClampActions(system, config.switch_drive);
    }
  }
  std::vector<double> u = LyapunovGradient(system, target, rho);
  for (std::size_t j = 0; j < u.size(); ++j) u[j] *= config.gain[j];
  return ClampActions(system, u);
}

}  // namespace qstab
