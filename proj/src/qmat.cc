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

#include "qstab/qmat.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qstab/errors.h"

namespace qstab {
namespace {

void RequireSameDim(const ComplexMatrix& a, const ComplexMatrix& b,
                    const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" +
                         std::to_string(a.rows()) + " vs " +
                         std::to_string(b.rows()) + ")");
  }
}

}  // namespace

ComplexMatrix MakeMatrix(std::span<const Complex> row_major) {
  const auto count = static_cast<long>(row_major.size());
  const long n = std::lround(std::sqrt(static_cast<double>(count)));
  if (n == 0 || n * n != count) {
    throw DimensionError("matrix data is not square: " +
                         std::to_string(count) + " entries");
  }
  if (n > kMaxDim) {
    throw DimensionError("dimension " + std::to_string(n) +
                         " exceeds the supported maximum " +
                         std::to_string(kMaxDim));
  }
  ComplexMatrix m(n, n);
  for (long r = 0; r < n; ++r) {
    for (long c = 0; c < n; ++c) m(r, c) = row_major[r * n + c];
  }
  return m;
}

ComplexMatrix MakeDiagonal(std::span<const double> diagonal) {
  const auto n = static_cast<long>(diagonal.size());
  if (n == 0 || n > kMaxDim) {
    throw DimensionError("diagonal length " + std::to_string(n) +
                         " outside [1, " + std::to_string(kMaxDim) + "]");
  }
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  for (long i = 0; i < n; ++i) m(i, i) = diagonal[i];
  return m;
}

ComplexMatrix Identity(int dim) {
  if (dim <= 0 || dim > kMaxDim) {
    throw DimensionError("identity dimension " + std::to_string(dim));
  }
  return ComplexMatrix::Identity(dim, dim);
}

namespace pauli {

ComplexMatrix I2() { return ComplexMatrix::Identity(2, 2); }

ComplexMatrix X() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  return m;
}

ComplexMatrix Y() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = Complex(0.0, -1.0);
  m(1, 0) = Complex(0.0, 1.0);
  return m;
}

ComplexMatrix Z() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

}  // namespace pauli

ComplexMatrix Kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const long n = a.rows() * b.rows();
  if (a.rows() != a.cols() || b.rows() != b.cols()) {
    throw DimensionError("kron: operands must be square");
  }
  if (n > kMaxDim) {
    throw DimensionError("kron: result dimension " + std::to_string(n) +
                         " exceeds " + std::to_string(kMaxDim));
  }
  ComplexMatrix out(n, n);
  const long nb = b.rows();
  for (long i = 0; i < a.rows(); ++i) {
    for (long j = 0; j < a.cols(); ++j) {
      out.block(i * nb, j * nb, nb, nb) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix Commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  RequireSameDim(a, b, "commutator");
  return a * b - b * a;
}

double HermitianDefect(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("matrix is not square");
  double worst = 0.0;
  for (long r = 0; r < a.rows(); ++r) {
    for (long c = r; c < a.cols(); ++c) {
      worst = std::max(worst, std::abs(a(r, c) - std::conj(a(c, r))));
    }
  }
  return worst;
}

double RealTraceOfProduct(const ComplexMatrix& a, const ComplexMatrix& b) {
  RequireSameDim(a, b, "trace of product");
  double acc = 0.0;
  for (long i = 0; i < a.rows(); ++i) {
    for (long k = 0; k < a.cols(); ++k) {
      acc += a(i, k).real() * b(k, i).real() - a(i, k).imag() * b(k, i).imag();
    }
  }
  return acc;
}

ComplexMatrix SpectralDecomposition::Reconstruct() const {
  return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() *
         eigenvectors.adjoint();
}

SpectralDecomposition EigHermitian(const ComplexMatrix& input) {
  if (input.rows() != input.cols()) throw DimensionError("eig: not square");
  if (HermitianDefect(input) > Tolerances::kEigenAsymmetry) {
    throw ContractViolation("eig: input is not Hermitian");
  }
  const long n = input.rows();
  ComplexMatrix a = 0.5 * (input + input.adjoint());
  ComplexMatrix v = ComplexMatrix::Identity(n, n);

  const double scale = std::max(a.norm(), 1e-300);
  bool converged = false;
  for (int sweep = 0; sweep < Tolerances::kJacobiMaxSweeps; ++sweep) {
    double off = 0.0;
    for (long p = 0; p < n; ++p) {
      for (long q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    }
    if (std::sqrt(off) <= 1e-15 * scale) {
      converged = true;
      break;
    }
    for (long p = 0; p < n; ++p) {
      for (long q = p + 1; q < n; ++q) {
        const double mag = std::abs(a(p, q));
        if (mag <= 1e-300) continue;
        const Complex phase = a(p, q) / mag;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * mag);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const Complex sc = s * std::conj(phase);
        const Complex sp = s * phase;
        const Complex cc = c * std::conj(phase);
        const Complex cp = c * phase;
        for (long k = 0; k < n; ++k) {
          const Complex akp = a(k, p);
          const Complex akq = a(k, q);
          a(k, p) = c * akp - sc * akq;
          a(k, q) = s * akp + cc * akq;
        }
        for (long k = 0; k < n; ++k) {
          const Complex apk = a(p, k);
          const Complex aqk = a(q, k);
          a(p, k) = c * apk - sp * aqk;
          a(q, k) = s * apk + cp * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (long k = 0; k < n; ++k) {
          const Complex vkp = v(k, p);
          const Complex vkq = v(k, q);
          v(k, p) = c * vkp - sc * vkq;
          v(k, q) = s * vkp + cc * vkq;
        }
      }
    }
  }
  if (!converged) {
    throw ConvergenceError("eig: Jacobi iteration did not converge in " +
                           std::to_string(Tolerances::kJacobiMaxSweeps) +
                           " sweeps");
  }

  std::vector<long> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](long x, long y) {
    return a(x, x).real() > a(y, y).real();
  });
  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (long i = 0; i < n; ++i) {
    out.eigenvalues(i) = a(order[i], order[i]).real();
    out.eigenvectors.col(i) = v.col(order[i]);
  }
  return out;
}

DensityMatrix DensityMatrix::FromMatrix(const ComplexMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError("density matrix must be square and non-empty");
  }
  if (!m.allFinite()) {
    throw ContractViolation("density matrix has non-finite entries");
  }
  if (HermitianDefect(m) > Tolerances::kHermitian) {
    throw ContractViolation("density matrix is not Hermitian");
  }
  if (std::abs(m.trace() - 1.0) > Tolerances::kTrace) {
    throw ContractViolation("density matrix trace is not 1");
  }
  const SpectralDecomposition spec = EigHermitian(m);
  if (spec.eigenvalues(m.rows() - 1) < -Tolerances::kPsd) {
    throw ContractViolation("density matrix is not positive semidefinite");
  }
  return DensityMatrix(m);
}

DensityMatrix DensityMatrix::FromPureState(const ComplexVector& psi) {
  const double norm = psi.norm();
  if (psi.size() == 0 || !(norm > 0.0)) {
    throw ContractViolation("pure state vector must be non-zero");
  }
  const ComplexVector unit = psi / norm;
  ComplexMatrix m = unit * unit.adjoint();
  m = 0.5 * (m + m.adjoint()).eval();
  return DensityMatrix(m);
}

DensityMatrix DensityMatrix::MaximallyMixed(int dim) {
  return DensityMatrix(Identity(dim) / static_cast<double>(dim));
}

double DensityMatrix::Purity() const { return RealTraceOfProduct(m_, m_); }

ComplexMatrix Dissipator(const ComplexMatrix& c, const DensityMatrix& rho) {
  const ComplexMatrix& r = rho.matrix();
  RequireSameDim(c, r, "dissipator");
  const ComplexMatrix cdc = c.adjoint() * c;
  return c * r * c.adjoint() - 0.5 * (cdc * r + r * cdc);
}

ComplexMatrix Innovation(const ComplexMatrix& c, const DensityMatrix& rho) {
  const ComplexMatrix& r = rho.matrix();
  RequireSameDim(c, r, "innovation");
  const ComplexMatrix cr = c * r;
  const ComplexMatrix rc = r * c.adjoint();
  const Complex expectation = (cr + rc).trace();
  return cr + rc - expectation * r;
}

double TraceDistanceToTarget(const DensityMatrix& target,
                             const DensityMatrix& rho) {
  const double d = 1.0 - RealTraceOfProduct(target.matrix(), rho.matrix());
  if (d < -Tolerances::kDistanceClamp || d > 1.0 + Tolerances::kDistanceClamp) {
    throw ContractViolation("distance " + std::to_string(d) +
                            " outside [0, 1]; is the target pure?");
  }
  return std::clamp(d, 0.0, 1.0);
}

bool IsPure(const DensityMatrix& rho) {
  return std::abs(rho.Purity() - 1.0) <= Tolerances::kPurity;
}

RealVector ProjectOntoSimplex(const RealVector& values) {
  const long n = values.size();
  std::vector<double> sorted(values.data(), values.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double shift = 0.0;
  for (long k = 0; k < n; ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) shift = candidate;
  }
  RealVector out(n);
  for (long i = 0; i < n; ++i) out(i) = std::max(values(i) - shift, 0.0);
  return out;
}

PhysicalRepair RepairToPhysical(const ComplexMatrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw DimensionError("projection: matrix must be square");
  }
  if (!a.allFinite()) {
    throw TrajectoryDiverged("state has non-finite entries");
  }
  ComplexMatrix sym = 0.5 * (a + a.adjoint());
  const double trace = sym.trace().real();
  if (std::abs(trace - 1.0) > Tolerances::kTraceDivergence) {
    throw TrajectoryDiverged("state trace " + std::to_string(trace) +
                             " diverged from 1");
  }
  const SpectralDecomposition spec = EigHermitian(sym);
  const RealVector repaired = ProjectOntoSimplex(spec.eigenvalues);
  const double change = (repaired - spec.eigenvalues).cwiseAbs().maxCoeff();
  if (change <= Tolerances::kRepairChange) {
    return {DensityMatrix(std::move(sym)), false};
  }
  ComplexMatrix out = spec.eigenvectors *
                      repaired.cast<Complex>().asDiagonal() *
                      spec.eigenvectors.adjoint();
  out = 0.5 * (out + out.adjoint()).eval();
  return {DensityMatrix(std::move(out)), true};
}

DensityMatrix ProjectToPhysical(const ComplexMatrix& a) {
  return RepairToPhysical(a).state;
}

}  // namespace qstab
