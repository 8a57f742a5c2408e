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

#include "qstab/catalog.h"

#include <cmath>

#include <gtest/gtest.h>

#include "qstab/errors.h"
#include "test_util.h"

namespace qstab {
namespace {

using testing::MaxAbs;

TEST(CatalogTest, Names) {
  const auto names = CatalogSystemNames();
  ASSERT_EQ(names.size(), 2u);
  EXPECT_EQ(names[0], "bell2q");
  EXPECT_EQ(names[1], "ghz3q");
  EXPECT_THROW(CatalogEntry("nope"), std::exception);
}

TEST(CatalogTest, BellSystemMatrices) {
  const SystemCatalogEntry e = CatalogEntry("bell2q");
  EXPECT_EQ(e.system.dim(), 4);
  EXPECT_EQ(MaxAbs(e.system.h0), 0.0);
  // sigma_y (x) I written out: rows |00>,|01>,|10>,|11>.
  ComplexMatrix y1 = ComplexMatrix::Zero(4, 4);
  y1(0, 2) = Complex(0, -1);
  y1(1, 3) = Complex(0, -1);
  y1(2, 0) = Complex(0, 1);
  y1(3, 1) = Complex(0, 1);
  EXPECT_EQ(MaxAbs(e.system.controls[0] - y1), 0.0);
  ComplexMatrix y2 = ComplexMatrix::Zero(4, 4);
  y2(0, 1) = Complex(0, -1);
  y2(1, 0) = Complex(0, 1);
  y2(2, 3) = Complex(0, -1);
  y2(3, 2) = Complex(0, 1);
  EXPECT_EQ(MaxAbs(e.system.controls[1] - y2), 0.0);
  const double c[] = {2, 0, 0, -2};
  EXPECT_EQ(MaxAbs(e.system.observable - MakeDiagonal(c)), 0.0);
  EXPECT_EQ(e.max_time, 20.0);
  EXPECT_EQ(e.system.action_low, (std::vector<double>{-1, -1}));
  EXPECT_EQ(e.system.action_high, (std::vector<double>{1, 1}));
}

TEST(CatalogTest, BellTarget) {
  const SystemCatalogEntry e = CatalogEntry("bell2q");
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected(1, 1) = expected(2, 2) = expected(1, 2) = expected(2, 1) = 0.5;
  EXPECT_LT(MaxAbs(e.target.matrix() - expected), 1e-15);
}

TEST(CatalogTest, GhzSystemMatrices) {
  const SystemCatalogEntry e = CatalogEntry("ghz3q");
  EXPECT_EQ(e.system.dim(), 8);
  const double h0[] = {1, -1, -1, 1, 1, -1, -1, 1};
  EXPECT_EQ(MaxAbs(e.system.h0 - MakeDiagonal(h0)), 0.0);
  const double c[] = {3, 1, -3, -1, -1, -3, 1, 3};
  EXPECT_EQ(MaxAbs(e.system.observable - MakeDiagonal(c)), 0.0);
  // H1 = I I X + X X I flips bit 0, or bits 2 and 1 together.
  ComplexMatrix h1 = ComplexMatrix::Zero(8, 8);
  ComplexMatrix h2 = ComplexMatrix::Zero(8, 8);
  for (int s = 0; s < 8; ++s) {
    h1(s ^ 1, s) += 1.0;
    h1(s ^ 6, s) += 1.0;
    h2(s ^ 4, s) += 1.0;
    h2(s ^ 3, s) += 1.0;
  }
  EXPECT_EQ(MaxAbs(e.system.controls[0] - h1), 0.0);
  EXPECT_EQ(MaxAbs(e.system.controls[1] - h2), 0.0);
  EXPECT_EQ(e.max_time, 40.0);
}

TEST(CatalogTest, GhzTargetCommutesWithDrift) {
  const SystemCatalogEntry e = CatalogEntry("ghz3q");
  ComplexMatrix expected = ComplexMatrix::Zero(8, 8);
  expected(0, 0) = expected(7, 7) = expected(0, 7) = expected(7, 0) = 0.5;
  EXPECT_LT(MaxAbs(e.target.matrix() - expected), 1e-15);
  EXPECT_LT(MaxAbs(Commutator(e.system.h0, e.target.matrix())), 1e-15);
}

TEST(CatalogTest, NamedStates) {
  const double r2[] = {1, 0, 0, 0, 0, 0, 0, 0};
  EXPECT_EQ(MaxAbs(CatalogState("ghz_rho02").matrix() - MakeDiagonal(r2)), 0.0);
  EXPECT_NEAR(CatalogState("mixed8").Purity(), 0.125, 1e-15);
  EXPECT_NEAR(CatalogState("mixed4").Purity(), 0.25, 1e-15);
  EXPECT_THROW(CatalogState("nope"), std::exception);
}

}  // namespace
}  // namespace qstab
