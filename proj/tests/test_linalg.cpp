#include <gtest/gtest.h>

#include "generators.hpp"
#include "treeshift/error.hpp"
#include "treeshift/linalg.hpp"
#include "treeshift/window.hpp"

using namespace treeshift;

namespace {

// Zero-diagonal Jordan block: e_k -> e_{k-1}, e_0 -> 0.
Eigen::MatrixXd jordan(Eigen::Index d) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index k = 1; k < d; ++k) m(k - 1, k) = 1.0;
  return m;
}

}  // namespace

TEST(KrylovRank, JordanBlockBottomVector) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
  x(3) = 1.0;
  EXPECT_EQ(krylov_rank(jordan(4), x), 4u);
}

TEST(KrylovRank, IdentityHasRankOne) {
  Eigen::VectorXd x = Eigen::VectorXd::Random(6);
  EXPECT_EQ(krylov_rank(Eigen::MatrixXd::Identity(6, 6), x), 1u);
}

TEST(KrylovRank, TwoJordanBlocksNeverCyclic) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(6, 6);
  m.topLeftCorner(3, 3) = jordan(3);
  m.bottomRightCorner(3, 3) = jordan(3);
  gen::Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x(6);
    for (auto& c : x) c = gen::uniform(rng, -1.0, 1.0);
    EXPECT_LE(krylov_rank(m, x), 3u);
  }
  EXPECT_EQ(cokernel_dimension(m), 2u);
}

TEST(KrylovRank, Errors) {
  Eigen::VectorXd x = Eigen::VectorXd::Ones(5);
  EXPECT_THROW(krylov_rank(Eigen::MatrixXd::Zero(5, 4), x), Error);
  try {
    krylov_rank(Eigen::MatrixXd::Identity(5, 5), x, 1e-8, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionCap);
  }
}

TEST(NumericalRank, ColumnScalesAreJudgedSeparately) {
  Eigen::MatrixXd a(3, 3);
  a << 1e-30, 0, 0, 0, 1, 0, 0, 0, 1e20;
  EXPECT_EQ(numerical_rank(a), 3u);
  a.col(2) = 1e20 * a.col(1);
  EXPECT_EQ(numerical_rank(a), 2u);
}

TEST(NumericalRank, MatchesEigenOnRandomMatrices) {
  gen::Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 4 + trial % 7;
    const Eigen::Index r = 1 + trial % n;
    Eigen::MatrixXd u(n, r), v(r, n);
    for (auto& c : u.reshaped()) c = gen::uniform(rng, -1, 1);
    for (auto& c : v.reshaped()) c = gen::uniform(rng, -1, 1);
    Eigen::MatrixXd a = u * v;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    EXPECT_EQ(numerical_rank(a), static_cast<std::size_t>(lu.rank()));
  }
}

TEST(OrthonormalSpan, ResidualVanishesOnFullRank) {
  gen::Rng rng(3);
  Eigen::MatrixXd a(5, 5);
  for (auto& c : a.reshaped()) c = gen::uniform(rng, -1, 1);
  auto q = orthonormal_span(a);
  EXPECT_EQ(q.cols(), 5);
  EXPECT_LE(max_projection_residual(q), 1e-12);
  EXPECT_NEAR(max_projection_residual(orthonormal_span(a.leftCols(4))), 1.0, 1.0);
}

TEST(Cokernel, RootedFiniteTreeCorank) {
  gen::Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    auto rt = gen::random_finite_tree(rng, 10 + 7 * trial);
    ShiftOperator s(rt.tree, gen::random_map_weights(rng, *rt.tree, 0.1, 1.0));
    auto m = dense_truncation(s, TreeWindow::standard(rt.tree));
    EXPECT_EQ(cokernel_dimension(m), 1 + rt.tree->symbolic_branching()->value);
  }
}
