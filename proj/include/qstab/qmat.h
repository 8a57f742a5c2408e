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

#ifndef QSTAB_QMAT_H_
#define QSTAB_QMAT_H_

// Dense complex linear algebra for small Hilbert spaces (dimension <= 16)
// and the measurement superoperators used by the stochastic master equation.

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace qstab {

using Complex = std::complex<double>;

inline constexpr int kMaxDim = 16;

// Storage is bounded at kMaxDim so small matrices live on the stack.
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic,
                                    Eigen::ColMajor, kMaxDim, kMaxDim>;
using RealVector =
    Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using ComplexVector =
    Eigen::Matrix<Complex, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

// Every numerical tolerance used across the library.
struct Tolerances {
  static constexpr double kHermitian = 1e-10;
  static constexpr double kTrace = 1e-10;
  static constexpr double kPsd = 1e-10;
  static constexpr double kPurity = 1e-9;
  // Slack allowed before a distance outside [0, 1] is treated as a bug.
  static constexpr double kDistanceClamp = 1e-9;
  // Largest |Tr - 1| the physical repair accepts; beyond it the integrator
  // has diverged.
  static constexpr double kTraceDivergence = 0.5;
  // Largest anti-Hermitian part accepted by the eigensolver.
  static constexpr double kEigenAsymmetry = 1e-8;
  // Eigenvalue change below which a repair counts as a no-op.
  static constexpr double kRepairChange = 1e-12;
  static constexpr int kJacobiMaxSweeps = 100;
};

// Builds an n x n matrix from n*n row-major entries. Throws DimensionError
// when the entry count is not a perfect square or exceeds kMaxDim^2.
ComplexMatrix MakeMatrix(std::span<const Complex> row_major);
ComplexMatrix MakeDiagonal(std::span<const double> diagonal);
ComplexMatrix Identity(int dim);

namespace pauli {
ComplexMatrix I2();
ComplexMatrix X();
ComplexMatrix Y();
ComplexMatrix Z();
}  // namespace pauli

// Kronecker product with `a` as the slow index.
ComplexMatrix Kron(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix Commutator(const ComplexMatrix& a, const ComplexMatrix& b);

// max |a - a^dagger| over entries.
double HermitianDefect(const ComplexMatrix& a);

// Re Tr(a b) in O(n^2).
double RealTraceOfProduct(const ComplexMatrix& a, const ComplexMatrix& b);

struct SpectralDecomposition {
  RealVector eigenvalues;     // descending
  ComplexMatrix eigenvectors;  // unitary, columns match eigenvalues

  ComplexMatrix Reconstruct() const;
};

// Cyclic Jacobi eigensolver for Hermitian input. Throws ContractViolation
// when the input is not Hermitian within Tolerances::kEigenAsymmetry and
// ConvergenceError after Tolerances::kJacobiMaxSweeps sweeps.
SpectralDecomposition EigHermitian(const ComplexMatrix& a);

struct PhysicalRepair;

// A Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
 public:
  // Validates every invariant; throws ContractViolation on failure.
  static DensityMatrix FromMatrix(const ComplexMatrix& m);
  // |psi><psi| for a normalized copy of `psi`.
  static DensityMatrix FromPureState(const ComplexVector& psi);
  static DensityMatrix MaximallyMixed(int dim);

  const ComplexMatrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  double Purity() const;

 private:
  friend struct PhysicalRepair;
  friend PhysicalRepair RepairToPhysical(const ComplexMatrix& a);
  explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {}

  ComplexMatrix m_;
};

// D[c]rho = c rho c^dagger - (c^dagger c rho + rho c^dagger c) / 2.
ComplexMatrix Dissipator(const ComplexMatrix& c, const DensityMatrix& rho);

// H[c]rho = c rho + rho c^dagger - Tr[(c + c^dagger) rho] rho.
ComplexMatrix Innovation(const ComplexMatrix& c, const DensityMatrix& rho);

// 1 - Re Tr(rho_d rho), clamped into [0, 1].
double TraceDistanceToTarget(const DensityMatrix& target,
                             const DensityMatrix& rho);

// True when Tr(rho^2) is within Tolerances::kPurity of 1.
bool IsPure(const DensityMatrix& rho);

struct PhysicalRepair {
  DensityMatrix state;
  // Whether any eigenvalue moved by more than Tolerances::kRepairChange.
  bool changed;
};

// Nearest unit-trace PSD matrix in the 2-norm: symmetrize, diagonalize, and
// project the spectrum onto the probability simplex. Throws
// TrajectoryDiverged when |Tr - 1| exceeds Tolerances::kTraceDivergence or an
// entry is not finite.
PhysicalRepair RepairToPhysical(const ComplexMatrix& a);
DensityMatrix ProjectToPhysical(const ComplexMatrix& a);

// Euclidean projection of `values` onto {x : x >= 0, sum x = 1}.
RealVector ProjectOntoSimplex(const RealVector& values);

}  // namespace qstab

#endif  // QSTAB_QMAT_H_
