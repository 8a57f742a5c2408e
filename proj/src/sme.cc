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

#include "qstab/sme.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "json.hpp"

#include "qstab/errors.h"

namespace qstab {
namespace {

ComplexMatrix TotalHamiltonian(const SystemSpec& spec,
                               std::span<const double> clamped) {
  ComplexMatrix h = spec.h0;
  for (std::size_t j = 0; j < clamped.size(); ++j) {
    if (clamped[j] != 0.0) h += clamped[j] * spec.controls[j];
  }
  return h;
}

void RequireStateDim(const SystemSpec& spec, const DensityMatrix& rho) {
  if (rho.dim() != spec.dim()) {
    throw DimensionError("state dimension " + std::to_string(rho.dim()) +
                         " does not match system dimension " +
                         std::to_string(spec.dim()));
  }
}

}  // namespace

void SystemSpec::Validate() const {
  const long n = h0.rows();
  if (n == 0 || h0.cols() != n) {
    throw ContractViolation(name + ": H0 must be square and non-empty");
  }
  auto check_operator = [&](const ComplexMatrix& m, const std::string& what) {
    if (m.rows() != n || m.cols() != n) {
      throw ContractViolation(name + ": " + what + " has wrong dimension");
    }
    if (HermitianDefect(m) > Tolerances::kHermitian) {
      throw ContractViolation(name + ": " + what + " is not Hermitian");
    }
  };
  check_operator(h0, "H0");
  check_operator(observable, "observable");
  for (std::size_t j = 0; j < controls.size(); ++j) {
    check_operator(controls[j], "control H" + std::to_string(j + 1));
  }
  if (!(kappa_c >= 0.0)) throw ContractViolation(name + ": kappa_c must be >= 0");
  if (!(eta_c >= 0.0 && eta_c <= 1.0)) {
    throw ContractViolation(name + ": eta_c must lie in [0, 1]");
  }
  if (!(dt > 0.0)) throw ContractViolation(name + ": dt must be > 0");
  if (action_low.size() != controls.size() ||
      action_high.size() != controls.size()) {
    throw ContractViolation(name + ": one action bound pair per control");
  }
  for (std::size_t j = 0; j < controls.size(); ++j) {
    if (!(action_low[j] < action_high[j])) {
      throw ContractViolation(name + ": action bounds need low < high");
    }
  }
}

double DrawDw(NoiseStream& noise, double dt) {
  return std::sqrt(dt) * noise.NextStandardNormal();
}

std::vector<double> ClampActions(const SystemSpec& spec,
                                 std::span<const double> u) {
  if (static_cast<int>(u.size()) != spec.num_controls()) {
    throw DimensionError("expected " + std::to_string(spec.num_controls()) +
                         " control amplitudes, got " +
                         std::to_string(u.size()));
  }
  std::vector<double> out(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    // NaN actions map to the lower bound rather than poisoning the state.
    out[j] = std::isnan(u[j])
                 ? spec.action_low[j]
                 : std::clamp(u[j], spec.action_low[j], spec.action_high[j]);
  }
  return out;
}

ComplexMatrix DeterministicDrift(const SystemSpec& spec,
                                 const DensityMatrix& rho,
                                 std::span<const double> u) {
  RequireStateDim(spec, rho);
  const std::vector<double> clamped = ClampActions(spec, u);
  const ComplexMatrix h = TotalHamiltonian(spec, clamped);
  const Complex minus_i(0.0, -1.0);
  return minus_i * Commutator(h, rho.matrix()) +
         spec.kappa_c * Dissipator(spec.observable, rho);
}

StepOutcome SmeStep(const SystemSpec& spec, const DensityMatrix& rho,
                    std::span<const double> u, NoiseStream& noise) {
  return SmeStepWithIncrement(spec, rho, u, DrawDw(noise, spec.dt));
}

StepOutcome SmeStepWithIncrement(const SystemSpec& spec,
                                 const DensityMatrix& rho,
                                 std::span<const double> u, double dw) {
  RequireStateDim(spec, rho);
  const std::vector<double> clamped = ClampActions(spec, u);
  const ComplexMatrix& r = rho.matrix();
  const ComplexMatrix& c = spec.observable;
  const double dt = spec.dt;

  const ComplexMatrix h = TotalHamiltonian(spec, clamped);
  const ComplexMatrix hr = h * r;
  // (H rho)^dagger = rho H for Hermitian H and rho.
  const ComplexMatrix commutator = hr - hr.adjoint();

  const ComplexMatrix cr = c * r;
  const ComplexMatrix rc = cr.adjoint();
  const ComplexMatrix cdcr = c.adjoint() * cr;
  const ComplexMatrix dissipator =
      cr * c.adjoint() - 0.5 * (cdcr + cdcr.adjoint());
  const Complex expectation = cr.trace() + rc.trace();
  const ComplexMatrix innovation = cr + rc - expectation * r;

  const double gain = std::sqrt(spec.eta_c * spec.kappa_c);
  const Complex minus_i_dt(0.0, -dt);
  const ComplexMatrix next = r + minus_i_dt * commutator +
                             (spec.kappa_c * dt) * dissipator +
                             (gain * dw) * innovation;

  PhysicalRepair repair = RepairToPhysical(next);
  const double dy = gain * expectation.real() * dt + dw;
  return {std::move(repair.state), dy, dw, repair.changed};
}

void TrajectoryWriter::Write(const TrajectoryRecord& record) {
  nlohmann::json j;
  j["t"] = record.t;
  j["distance"] = record.distance;
  j["u"] = record.u;
  j["dy"] = record.dy;
  j["projected"] = record.projected;
  out_ << j.dump() << '\n';
}

}  // namespace qstab
