#include <gtest/gtest.h>

#include <cmath>

#include "jchmf/operators.hpp"

using namespace jchmf;

TEST(BasisIndex, FlatOrderingIsTwoNPlusQ) {
  EXPECT_EQ((BasisIndex{0, 0}.flat()), 0u);
  EXPECT_EQ((BasisIndex{0, 1}.flat()), 1u);
  EXPECT_EQ((BasisIndex{3, 0}.flat()), 6u);
  EXPECT_EQ((BasisIndex{3, 1}.flat()), 7u);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(BasisIndex::from_flat(i).flat(), i);
  EXPECT_EQ(site_dimension(12), 26u);
}

TEST(LadderOps, TwoLevelTruncationEntries) {
  const auto ops = ladder_ops(2);
  std::size_t nonzero = 0;
  for (auto x : ops.annihilate.data())
    if (x != cplx{}) ++nonzero;
  EXPECT_EQ(nonzero, 2u);
  EXPECT_EQ(ops.annihilate(0, 1), cplx(1.0));
  EXPECT_EQ(ops.annihilate(1, 2), cplx(std::sqrt(2.0)));
  EXPECT_EQ(ops.create, ops.annihilate.adjoint());
}

TEST(LadderOps, NumberOperator) {
  const auto one = ladder_ops(1);
  EXPECT_EQ(one.create * one.annihilate, DenseMatrix::diagonal({0.0, 1.0}));

  const auto ops = ladder_ops(12);
  DenseMatrix expected(13, 13);
  for (std::size_t n = 0; n <= 12; ++n) expected(n, n) = static_cast<double>(n);
  EXPECT_LE(max_abs_diff(ops.create * ops.annihilate, expected), 1e-14);  // sqrt(n)^2 rounds
}

TEST(LadderOps, RejectsEmptyTruncation) { EXPECT_THROW(ladder_ops(0), ContractViolation); }

TEST(PauliOps, Algebra) {
  const auto p = pauli_ops();
  EXPECT_EQ(p.sigma_z, DenseMatrix::diagonal({-1.0, 1.0}));
  EXPECT_EQ(p.sigma_plus(1, 0), cplx(1.0));  // sigma+ |g> = |e>
  EXPECT_EQ(p.sigma_plus * p.sigma_minus + p.sigma_minus * p.sigma_plus, DenseMatrix::identity(2));
  EXPECT_EQ(p.sigma_plus * p.sigma_plus, DenseMatrix(2, 2));
  const DenseMatrix half = (DenseMatrix::identity(2) + p.sigma_z) * cplx(0.5);
  EXPECT_EQ(p.sigma_plus * p.sigma_minus, half);
}

TEST(Kron, IndexOrderingPutsQubitFast) {
  EXPECT_EQ(kron(DenseMatrix::identity(3), DenseMatrix::identity(2)), DenseMatrix::identity(6));
  EXPECT_EQ(kron(DenseMatrix::diagonal({0.0, 1.0, 2.0}), DenseMatrix::identity(2)),
            DenseMatrix::diagonal({0.0, 0.0, 1.0, 1.0, 2.0, 2.0}));
  const DenseMatrix k = kron(ladder_ops(1).annihilate, pauli_ops().sigma_z);
  EXPECT_EQ(k(0, 2), cplx(-1.0));
  EXPECT_EQ(k(1, 3), cplx(1.0));
  EXPECT_EQ(k(2, 0), cplx(0.0));
}
