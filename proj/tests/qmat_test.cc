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

#include <array>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qstab/catalog.h"
#include "qstab/errors.h"
#include "test_util.h"

namespace qstab {
namespace {

using pauli::I2;
using pauli::X;
using pauli::Y;
using pauli::Z;
using testing::MaxAbs;

// Explicit 2x2 expansion of D[c]rho for real symmetric c and rho, written out
// entry by entry without matrix products.
std::array<double, 4> Dissipator2x2(std::array<double, 4> c,
                                    std::array<double, 4> r) {
  auto mul = [](std::array<double, 4> a, std::array<double, 4> b) {
    return std::array<double, 4>{a[0] * b[0] + a[1] * b[2],
                                 a[0] * b[1] + a[1] * b[3],
                                 a[2] * b[0] + a[3] * b[2],
                                 a[2] * b[1] + a[3] * b[3]};
  };
  const auto crc = mul(mul(c, r), c);
  const auto cc = mul(c, c);
  const auto ccr = mul(cc, r);
  const auto rcc = mul(r, cc);
  std::array<double, 4> out{};
  for (int i = 0; i < 4; ++i) out[i] = crc[i] - 0.5 * ccr[i] - 0.5 * rcc[i];
  return out;
}

DensityMatrix Ket0() {
  const double d[] = {1.0, 0.0};
  return DensityMatrix::FromMatrix(MakeDiagonal(d));
}

TEST(KronTest, CollectiveSigmaZ) {
  const ComplexMatrix c = Kron(Z(), I2()) + Kron(I2(), Z());
  const double expected[] = {2, 0, 0, -2};
  EXPECT_LT(MaxAbs(c - MakeDiagonal(expected)), 1e-15);
}

TEST(KronTest, IdentityOfIdentities) {
  EXPECT_LT(MaxAbs(Kron(I2(), I2()) - Identity(4)), 1e-15);
}

TEST(KronTest, ThreeQubitCorrelationObservable) {
  const ComplexMatrix c =
      2.0 * Kron(Kron(Z(), Z()), I2()) + Kron(I2(), Kron(Z(), Z()));
  const double expected[] = {3, 1, -3, -1, -1, -3, 1, 3};
  EXPECT_LT(MaxAbs(c - MakeDiagonal(expected)), 1e-15);
}

TEST(KronTest, SlowIndexIsFirstOperand) {
  // (X kron I)|00> = |10>, i.e. column 0 has its 1 in row 2.
  const ComplexMatrix m = Kron(X(), I2());
  EXPECT_EQ(m(2, 0), Complex(1.0));
  EXPECT_EQ(m(1, 0), Complex(0.0));
}

TEST(KronTest, Associative) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix a = testing::RandomHermitian(2, rng);
    const ComplexMatrix b = testing::RandomHermitian(2, rng);
    const ComplexMatrix c = testing::RandomHermitian(2, rng);
    EXPECT_LT(MaxAbs(Kron(Kron(a, b), c) - Kron(a, Kron(b, c))), 1e-14);
  }
}

TEST(KronTest, RejectsOversizedResult) {
  EXPECT_THROW(Kron(Identity(8), Identity(4)), DimensionError);
}

TEST(MakeMatrixTest, RejectsNonSquareData) {
  const Complex data[] = {1, 2, 3};
  EXPECT_THROW(MakeMatrix(data), DimensionError);
}

TEST(DissipatorTest, VanishesOnEigenprojector) {
  EXPECT_LT(MaxAbs(Dissipator(Z(), Ket0())), 1e-15);
}

TEST(DissipatorTest, SigmaXOnGroundStateMatchesExpansion) {
  const auto oracle = Dissipator2x2({0, 1, 1, 0}, {1, 0, 0, 0});
  // Oracle gives |1><1| - |0><0|.
  EXPECT_DOUBLE_EQ(oracle[0], -1.0);
  EXPECT_DOUBLE_EQ(oracle[3], 1.0);
  const ComplexMatrix got = Dissipator(X(), Ket0());
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(std::abs(got(i / 2, i % 2) - oracle[i]), 0.0, 1e-15);
  }
}

TEST(DissipatorTest, VanishesOnGhzTarget) {
  const double diag[] = {3, 1, -3, -1, -1, -3, 1, 3};
  const ComplexMatrix c = MakeDiagonal(diag);
  const DensityMatrix ghz = CatalogState("ghz");
  // Oracle premise: the target lies in the eigenvalue-3 eigenspace.
  EXPECT_LT(MaxAbs(c * ghz.matrix() - 3.0 * ghz.matrix()), 1e-15);
  EXPECT_LT(MaxAbs(Dissipator(c, ghz)), 1e-12);
}

TEST(DissipatorTest, RejectsDimensionMismatch) {
  EXPECT_THROW(Dissipator(Identity(4), Ket0()), DimensionError);
}

TEST(InnovationTest, VanishesOnEigenprojector) {
  EXPECT_LT(MaxAbs(Innovation(Z(), Ket0())), 1e-15);
}

TEST(InnovationTest, MaximallyMixedQubit) {
  // Tr(2 sigma_z I/2) = 0, so H = sigma_z I/2 + I/2 sigma_z = sigma_z.
  const ComplexMatrix got = Innovation(Z(), DensityMatrix::MaximallyMixed(2));
  EXPECT_LT(MaxAbs(got - Z()), 1e-15);
}

TEST(InnovationTest, VanishesOnBellTarget) {
  const ComplexMatrix c = Kron(Z(), I2()) + Kron(I2(), Z());
  const DensityMatrix bell = CatalogState("bell");
  EXPECT_LT(MaxAbs(c * bell.matrix()), 1e-15);
  EXPECT_LT(MaxAbs(Innovation(c, bell)), 1e-12);
}

TEST(SuperoperatorTest, TracelessAndHermitianForRandomInputs) {
  std::mt19937_64 rng(3);
  for (int n : {2, 4, 8, 16}) {
    for (int trial = 0; trial < 10; ++trial) {
      const ComplexMatrix c = testing::RandomHermitian(n, rng);
      const DensityMatrix rho = testing::RandomDensity(n, rng);
      const ComplexMatrix d = Dissipator(c, rho);
      const ComplexMatrix h = Innovation(c, rho);
      EXPECT_LT(std::abs(d.trace()), 1e-12);
      EXPECT_LT(std::abs(h.trace()), 1e-12);
      EXPECT_LT(HermitianDefect(d), 1e-12);
      EXPECT_LT(HermitianDefect(h), 1e-12);
    }
  }
}

TEST(SuperoperatorTest, EigenprojectorsAreFixedPoints) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 << (trial % 3);
    const ComplexMatrix u = testing::RandomUnitary(n, rng);
    std::uniform_real_distribution<double> spread(-3.0, 3.0);
    RealVector lambda(n);
    for (int i = 0; i < n; ++i) lambda(i) = spread(rng);
    const ComplexMatrix c = u * lambda.cast<Complex>().asDiagonal() * u.adjoint();
    const int k = trial % n;
    const DensityMatrix proj = DensityMatrix::FromPureState(u.col(k));
    EXPECT_LT(MaxAbs(Dissipator(c, proj)), 1e-12);
    EXPECT_LT(MaxAbs(Innovation(c, proj)), 1e-12);
  }
}

TEST(TraceDistanceTest, ZeroAtTarget) {
  const DensityMatrix ghz = CatalogState("ghz");
  EXPECT_NEAR(TraceDistanceToTarget(ghz, ghz), 0.0, 1e-15);
}

TEST(TraceDistanceTest, OrthogonalBasisState) {
  EXPECT_DOUBLE_EQ(
      TraceDistanceToTarget(CatalogState("ghz"), CatalogState("ghz_rho01")),
      1.0);
}

TEST(TraceDistanceTest, MaximallyMixed) {
  EXPECT_NEAR(TraceDistanceToTarget(CatalogState("ghz"),
                                    DensityMatrix::MaximallyMixed(8)),
              0.875, 1e-15);
}

TEST(TraceDistanceTest, RejectsMismatch) {
  EXPECT_THROW(TraceDistanceToTarget(CatalogState("ghz"), CatalogState("bell")),
               DimensionError);
}

TEST(EigTest, PauliZ) {
  const SpectralDecomposition s = EigHermitian(Z());
  EXPECT_DOUBLE_EQ(s.eigenvalues(0), 1.0);
  EXPECT_DOUBLE_EQ(s.eigenvalues(1), -1.0);
}

TEST(EigTest, PauliXEigenvectors) {
  const SpectralDecomposition s = EigHermitian(X());
  EXPECT_NEAR(s.eigenvalues(0), 1.0, 1e-15);
  EXPECT_NEAR(s.eigenvalues(1), -1.0, 1e-15);
  const double r = 1.0 / std::sqrt(2.0);
  // Compare up to a global phase via |<v|expected>|.
  const Complex plus = std::conj(s.eigenvectors(0, 0)) * r +
                       std::conj(s.eigenvectors(1, 0)) * r;
  const Complex minus = std::conj(s.eigenvectors(0, 1)) * r -
                        std::conj(s.eigenvectors(1, 1)) * r;
  EXPECT_NEAR(std::abs(plus), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(minus), 1.0, 1e-14);
}

TEST(EigTest, PureGhzState) {
  const SpectralDecomposition s = EigHermitian(CatalogState("ghz").matrix());
  EXPECT_NEAR(s.eigenvalues(0), 1.0, 1e-14);
  for (int i = 1; i < 8; ++i) EXPECT_NEAR(s.eigenvalues(i), 0.0, 1e-14);
}

TEST(EigTest, ReconstructsRandomHermitian) {
  std::mt19937_64 rng(17);
  for (int n = 1; n <= kMaxDim; ++n) {
    for (int trial = 0; trial < 5; ++trial) {
      const ComplexMatrix a = testing::RandomHermitian(n, rng);
      const SpectralDecomposition s = EigHermitian(a);
      const ComplexMatrix rec = s.Reconstruct();
      const Eigen::MatrixXcd diff = rec - a;
      EXPECT_LE(diff.operatorNorm(), 1e-9) << "n=" << n;
      const Eigen::MatrixXcd unit =
          s.eigenvectors.adjoint() * s.eigenvectors - Identity(n);
      EXPECT_LE(unit.cwiseAbs().maxCoeff(), 1e-12);
      for (int i = 1; i < n; ++i) {
        EXPECT_GE(s.eigenvalues(i - 1), s.eigenvalues(i));
      }
    }
  }
}

TEST(EigTest, DegenerateSpectrum) {
  const SpectralDecomposition s = EigHermitian(Identity(8));
  for (int i = 0; i < 8; ++i) EXPECT_DOUBLE_EQ(s.eigenvalues(i), 1.0);
}

TEST(EigTest, RejectsNonHermitian) {
  ComplexMatrix m = Z();
  m(0, 1) = 1.0;
  EXPECT_THROW(EigHermitian(m), ContractViolation);
}

TEST(DensityMatrixTest, ValidatesInvariants) {
  ComplexMatrix not_unit_trace = Identity(2);
  EXPECT_THROW(DensityMatrix::FromMatrix(not_unit_trace), ContractViolation);
  const double negative[] = {1.2, -0.2};
  EXPECT_THROW(DensityMatrix::FromMatrix(MakeDiagonal(negative)),
               ContractViolation);
  ComplexMatrix skew = 0.5 * Identity(2);
  skew(0, 1) = Complex(0.0, 0.1);
  EXPECT_THROW(DensityMatrix::FromMatrix(skew), ContractViolation);
  EXPECT_NO_THROW(DensityMatrix::FromMatrix(0.5 * Identity(2)));
}

TEST(ProjectionTest, ClipsNegativeEigenvalueInSharedBasis) {
  std::mt19937_64 rng(23);
  const ComplexMatrix u = testing::RandomUnitary(2, rng);
  const double lambda[] = {1.2, -0.2};
  const ComplexMatrix a = u * MakeDiagonal(lambda) * u.adjoint();
  const DensityMatrix p = ProjectToPhysical(a);
  const ComplexMatrix expected =
      u.col(0) * u.col(0).adjoint();  // eigenvalues {1, 0}, same vectors
  EXPECT_LT(MaxAbs(p.matrix() - expected), 1e-12);
}

TEST(ProjectionTest, PhysicalInputUnchanged) {
  std::mt19937_64 rng(29);
  for (int n : {2, 4, 8}) {
    const DensityMatrix rho = testing::RandomDensity(n, rng, 2);
    const PhysicalRepair r = RepairToPhysical(rho.matrix());
    EXPECT_FALSE(r.changed);
    EXPECT_LE(MaxAbs(r.state.matrix() - rho.matrix()), 1e-12);
  }
}

TEST(ProjectionTest, DiagonalExampleMatchesGridSearch) {
  const double diag[] = {0.5, 0.6, -0.1, 0.0};
  const DensityMatrix p = ProjectToPhysical(MakeDiagonal(diag));
  const double expected[] = {0.45, 0.55, 0.0, 0.0};
  EXPECT_LT(MaxAbs(p.matrix() - MakeDiagonal(expected)), 1e-12);

  const auto grid = testing::GridSimplexProjection({0.5, 0.6, -0.1, 0.0});
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(grid[i], expected[i], 1e-3);
}

TEST(ProjectionTest, Idempotent) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 << (trial % 3);
    ComplexMatrix a = testing::RandomHermitian(n, rng) * 0.3;
    a += Identity(n) * ((1.0 - a.trace().real()) / n);
    const DensityMatrix once = ProjectToPhysical(a);
    const DensityMatrix twice = ProjectToPhysical(once.matrix());
    EXPECT_LT(MaxAbs(once.matrix() - twice.matrix()), 1e-12);
  }
}

TEST(ProjectionTest, SymmetrizesAntiHermitianRoundOff) {
  ComplexMatrix a = 0.5 * Identity(2);
  a(0, 1) = Complex(0.0, 1e-9);
  const DensityMatrix p = ProjectToPhysical(a);
  EXPECT_LE(HermitianDefect(p.matrix()), 1e-15);
}

TEST(ProjectionTest, TraceDivergenceAborts) {
  EXPECT_THROW(ProjectToPhysical(2.0 * Identity(2)), TrajectoryDiverged);
  ComplexMatrix bad = 0.5 * Identity(2);
  bad(0, 0) = std::nan("");
  EXPECT_THROW(ProjectToPhysical(bad), TrajectoryDiverged);
}

}  // namespace
}  // namespace qstab
