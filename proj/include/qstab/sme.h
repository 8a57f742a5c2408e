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

#ifndef QSTAB_SME_H_
#define QSTAB_SME_H_

// Euler-Maruyama integration of the stochastic master equation
//
//   d rho = -i[H0 + sum_j u_j H_j, rho] dt + kappa D[c]rho dt
//           + sqrt(eta kappa) H[c]rho dW,
//   dy    = sqrt(eta kappa) Tr[(c + c^dagger) rho] dt + dW,
//
// followed by a repair onto the physical states after every step.

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "qstab/qmat.h"
#include "qstab/random.h"

namespace qstab {

struct SystemSpec {
  std::string name;
  ComplexMatrix h0;
  std::vector<ComplexMatrix> controls;
  ComplexMatrix observable;
  double kappa_c = 1.0;
  double eta_c = 1.0;
  double dt = 0.001;
  std::vector<double> action_low;   // one entry per control channel
  std::vector<double> action_high;

  int dim() const { return static_cast<int>(h0.rows()); }
  int num_controls() const { return static_cast<int>(controls.size()); }

  // Throws ContractViolation on any broken invariant.
  void Validate() const;
};

struct StepOutcome {
  DensityMatrix next_state;
  double dy;
  double dw;
  bool projected;
};

// Normal(0, dt) increment; advances the stream by exactly one.
double DrawDw(NoiseStream& noise, double dt);

// Clamps each channel into [action_low, action_high]. Throws
// DimensionError when u has the wrong length.
std::vector<double> ClampActions(const SystemSpec& spec,
                                 std::span<const double> u);

// -i[H0 + sum u_j H_j, rho] + kappa D[c]rho with u clamped.
ComplexMatrix DeterministicDrift(const SystemSpec& spec,
                                 const DensityMatrix& rho,
                                 std::span<const double> u);

// One step with dW drawn from `noise`.
StepOutcome SmeStep(const SystemSpec& spec, const DensityMatrix& rho,
                    std::span<const double> u, NoiseStream& noise);

// One step with a caller-supplied Wiener increment.
StepOutcome SmeStepWithIncrement(const SystemSpec& spec,
                                 const DensityMatrix& rho,
                                 std::span<const double> u, double dw);

struct TrajectoryRecord {
  double t;
  double distance;
  std::vector<double> u;
  double dy;
  bool projected;
};

// Line-delimited JSON dump of a trajectory, one object per step.
class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(std::ostream& out) : out_(out) {}
  void Write(const TrajectoryRecord& record);

 private:
  std::ostream& out_;
};

}  // namespace qstab

#endif  // QSTAB_SME_H_
