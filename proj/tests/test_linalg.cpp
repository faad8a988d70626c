// Copyright 2026 The qrnme Authors
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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qrnme/dynamics.hpp"
#include "qrnme/errors.hpp"
#include "qrnme/linalg.hpp"
#include "test_util.hpp"

namespace {

using namespace qrnme::linalg;
using qrnme::testing::max_diff;
using qrnme::testing::random_hermitian;
using qrnme::testing::random_matrix;
namespace ops = qrnme::dynamics::ops;

const Complex I{0.0, 1.0};

CMatrix naive_matmul(const CMatrix& a, const CMatrix& b) {
  CMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      Complex s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

TEST(Matmul, IdentityIsNeutral) {
  const CMatrix x{{1.0, {2.0, -1.0}}, {{0.5, 3.0}, -4.0}};
  EXPECT_EQ(CMatrix::identity(2) * x, x);
}

TEST(Matmul, RaisingTimesLoweringIsExcitedProjector) {
  const double d[] = {1.0, 0.0};
  EXPECT_EQ(ops::sigma_plus() * ops::sigma_minus(), CMatrix::diag(d));
}

TEST(Matmul, MatchesTripleLoop) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    const CMatrix a = random_matrix(3, 3, rng), b = random_matrix(3, 3, rng);
    EXPECT_LT(max_diff(matmul(a, b), naive_matmul(a, b)), 1e-12);
  }
  const CMatrix a = random_matrix(2, 4, rng), b = random_matrix(4, 3, rng);
  EXPECT_LT(max_diff(matmul(a, b), naive_matmul(a, b)), 1e-12);
}

TEST(Matmul, RejectsMismatch) {
  EXPECT_THROW(matmul(CMatrix(2, 3), CMatrix(2, 3)), qrnme::DimensionError);
}

TEST(Adjoint, Examples) {
  const CMatrix sym{{1.0, 2.0}, {2.0, -3.0}};
  EXPECT_EQ(adjoint(sym), sym);
  EXPECT_EQ(adjoint(ops::sigma_y()), ops::sigma_y());
  std::mt19937_64 rng(3);
  const CMatrix a = random_matrix(3, 2, rng);
  EXPECT_EQ(adjoint(adjoint(a)), a);
  EXPECT_EQ(adjoint(a).rows(), 2u);
}

TEST(Commutators, PauliAlgebra) {
  EXPECT_EQ(max_abs(commutator(ops::sigma_z(), ops::sigma_z())), 0.0);
  const double p1[] = {0.0, 1.0};
  EXPECT_EQ(max_abs(anticommutator(ops::sigma_plus() * ops::sigma_minus(), CMatrix::diag(p1))),
            0.0);
  EXPECT_LT(max_diff(commutator(ops::sigma_x(), ops::sigma_y()), 2.0 * I * ops::sigma_z()),
            1e-15);
  EXPECT_THROW(commutator(CMatrix(2, 2), CMatrix(3, 3)), qrnme::DimensionError);
}

TEST(Kron, Examples) {
  EXPECT_EQ(kron(CMatrix::identity(2), CMatrix::identity(2)), CMatrix::identity(4));
  const double d[] = {1.0, 1.0, -1.0, -1.0};
  EXPECT_EQ(kron(ops::sigma_z(), CMatrix::identity(2)), CMatrix::diag(d));
}

TEST(Kron, MixedProductIdentity) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const CMatrix a = random_matrix(2, 2, rng), b = random_matrix(2, 2, rng);
    const CMatrix c = random_matrix(2, 2, rng), d = random_matrix(2, 2, rng);
    EXPECT_LT(max_diff(kron(a, b) * kron(c, d), kron(a * c, b * d)), 1e-12);
  }
}

TEST(HermEig, Examples) {
  const auto ez = herm_eigenvalues(ops::sigma_z());
  ASSERT_EQ(ez.size(), 2u);
  EXPECT_NEAR(ez[0], -1.0, 1e-14);
  EXPECT_NEAR(ez[1], 1.0, 1e-14);
  const double d[] = {3.0, 1.0, 2.0};
  const auto e = herm_eigenvalues(CMatrix::diag(d));
  EXPECT_NEAR(e[0], 1.0, 1e-14);
  EXPECT_NEAR(e[1], 2.0, 1e-14);
  EXPECT_NEAR(e[2], 3.0, 1e-14);
}

TEST(HermEig, ReconstructsRandomHermitian) {
  std::mt19937_64 rng(17);
  for (std::size_t d : {2u, 4u, 9u, 16u}) {
    for (int rep = 0; rep < 5; ++rep) {
      const CMatrix h = random_hermitian(d, rng);
      const HermEig eig = herm_eig(h);
      ASSERT_EQ(eig.eigenvalues.size(), d);
      for (std::size_t k = 1; k < d; ++k) EXPECT_LE(eig.eigenvalues[k - 1], eig.eigenvalues[k]);
      const CMatrix& v = eig.eigenvectors;
      const CMatrix rec = v * CMatrix::diag(eig.eigenvalues) * adjoint(v);
      EXPECT_LT(frobenius_norm(rec - h), 1e-10);
      EXPECT_LT(frobenius_norm(adjoint(v) * v - CMatrix::identity(d)), 1e-10);
    }
  }
}

TEST(HermEig, RejectsNonHermitian) {
  EXPECT_THROW(herm_eig(ops::sigma_plus()), qrnme::InvariantError);
  EXPECT_THROW(herm_eig(CMatrix(2, 3)), qrnme::DimensionError);
}

TEST(Expm, Examples) {
  EXPECT_LT(max_diff(expm(CMatrix(3, 3)), CMatrix::identity(3)), 1e-15);
  const CMatrix rot = expm(ops::sigma_x() * (I * std::numbers::pi / 2.0));
  EXPECT_LT(max_diff(rot, I * ops::sigma_x()), 1e-12);
}

TEST(Expm, InverseIdentity) {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    const CMatrix a = random_matrix(4, 4, rng);
    EXPECT_LT(max_diff(expm(a) * expm(-a), CMatrix::identity(4)), 1e-10);
  }
}

TEST(Expm, CommutingSumFactorizes) {
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 10; ++rep) {
    // Polynomials in the same matrix commute.
    const CMatrix x = random_matrix(4, 4, rng, 0.5);
    const CMatrix a = x * Complex{0.7, 0.2} + CMatrix::identity(4);
    const CMatrix b = x * x * Complex{-0.3, 0.0} + x;
    ASSERT_LT(max_abs(a * b - b * a), 1e-12);
    EXPECT_LT(max_diff(expm(a + b), expm(a) * expm(b)), 1e-10 * max_abs(expm(a + b)));
  }
}

TEST(Expm, HermitianMatchesSpectralForm) {
  std::mt19937_64 rng(31);
  const CMatrix h = random_hermitian(5, rng);
  const HermEig eig = herm_eig(h);
  std::vector<double> ex;
  for (double l : eig.eigenvalues) ex.push_back(std::exp(l));
  const CMatrix ref = eig.eigenvectors * CMatrix::diag(ex) * adjoint(eig.eigenvectors);
  EXPECT_LT(max_diff(expm(h), ref), 1e-12 * max_abs(ref));
}

TEST(Purity, OperationsDoNotMutateInputs) {
  std::mt19937_64 rng(37);
  const CMatrix a = random_hermitian(3, rng), b = random_matrix(3, 3, rng);
  const CMatrix a0 = a, b0 = b;
  (void)matmul(a, b);
  (void)commutator(a, b);
  (void)anticommutator(a, b);
  (void)kron(a, b);
  (void)herm_eig(a);
  (void)expm(b);
  (void)adjoint(b);
  EXPECT_EQ(a, a0);
  EXPECT_EQ(b, b0);
}

TEST(Norms, Basics) {
  const CMatrix m{{1.0, -2.0}, {{0.0, 3.0}, 4.0}};
  EXPECT_DOUBLE_EQ(frobenius_norm_sq(m), 30.0);
  EXPECT_DOUBLE_EQ(one_norm(m), 6.0);
  EXPECT_DOUBLE_EQ(max_abs(m), 4.0);
  EXPECT_EQ(trace(m), Complex(5.0, 0.0));
}

}  // namespace
