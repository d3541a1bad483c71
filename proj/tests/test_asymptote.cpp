#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "treeshift/asymptote.hpp"
#include "treeshift/error.hpp"
#include "treeshift/linalg.hpp"

using namespace treeshift;

namespace {

struct Built {
  ShiftOperator s;
  TreeWindow w;
  AsymptoticProfile alpha;
  StableSubtree stable;
  AsymptoteDescriptor u;
};

Built build(ShiftOperator s, std::int64_t lo, std::int64_t hi, std::size_t breadth = 16) {
  TreeWindow w(s.tree_ptr(), lo, hi, breadth);
  auto alpha = alpha_profile(s, w);
  auto stable = stable_subtree(s, w, alpha);
  auto u = isometric_asymptote(s, w, alpha, stable);
  return {std::move(s), std::move(w), std::move(alpha), std::move(stable), std::move(u)};
}

}  // namespace

TEST(IsometricAsymptote, BinaryIsometry) {
  auto b = build(ShiftOperator(make_rootless_binary(), WeightAssignment::constant(std::sqrt(0.5))), -2, 2);
  EXPECT_EQ(b.u.type, AsymptoteType::CnuUnilateral);
  EXPECT_TRUE(b.u.multiplicity.infinite);
  for (const auto& [v, beta] : b.u.beta) EXPECT_NEAR(beta, std::sqrt(0.5), 1e-15);
  EXPECT_LE(b.u.cnu.value, std::ldexp(1.0, -60));
  EXPECT_LE(intertwining_residual(b.s, b.u, b.alpha, b.w), 1e-12);
}

TEST(IsometricAsymptote, SingleChildChainHasUnitBeta) {
  auto b = build(ShiftOperator(make_bilateral_path(), WeightAssignment::family(RayRule::exp_ray(1.0))), -5, 5);
  for (const auto& [v, beta] : b.u.beta) EXPECT_NEAR(beta, 1.0, 1e-10) << v;
  EXPECT_EQ(b.u.type, AsymptoteType::BilateralPlusUnilateral);
  EXPECT_EQ(b.u.multiplicity.value, 0u);
}

TEST(IsometricAsymptote, ExpSpineBinaryHasUnitaryPart) {
  // Spine weights exp(-1/(|l|+1)^2), off-spine siblings completing to an isometry.
  auto w = WeightAssignment::family(RayRule::exp_ray(1.0));
  w.off = std::sqrt(0.5);
  auto b = build(ShiftOperator(make_rootless_binary(), w), -2, 2, 32);
  EXPECT_EQ(b.u.type, AsymptoteType::BilateralPlusUnilateral);
  EXPECT_GT(b.u.cnu.value, 0.0);
  double bound = 0.0;
  for (std::int64_t j = 0; j < 400; ++j) bound += 1.0 / ((j + 1.0) * (j + 1.0));
  EXPECT_GE(b.u.cnu.value, std::exp(-4.0 * bound) - 1e-12);
}

TEST(IsometricAsymptote, RootedMultiplicity) {
  // Rooted tilde with isometric-complement weights: Br(T') = 1, so the
  // unilateral shift has multiplicity 2.
  auto w = WeightAssignment::family(RayRule::geometric(1.0, 0.5, 2, std::sqrt(0.5)), RayRule::constant(1.0));
  w.primed = RayRule::geometric(1.0, 0.5, 2, std::sqrt(0.5));
  auto b = build(ShiftOperator(make_tilde(true), w), 0, 6);
  EXPECT_EQ(b.u.type, AsymptoteType::UnilateralShift);
  EXPECT_EQ(b.u.multiplicity.value, 2u);
}

TEST(IsometricAsymptote, StableSubtreeEmpty) {
  ShiftOperator s(make_rooted_path(), WeightAssignment::constant(0.5));
  TreeWindow w(s.tree_ptr(), 0, 5);
  auto alpha = alpha_profile(s, w);
  auto st = stable_subtree(s, w, alpha);
  try {
    isometric_asymptote(s, w, alpha, st);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StableSubtreeEmpty);
  }
}

TEST(IsometricAsymptote, IntertwiningAndIsometryOnTilde) {
  gen::Rng rng(4);
  for (int trial = 0; trial < 6; ++trial) {
    const double scale = gen::uniform(rng, 1.5, 3.0);
    auto w = WeightAssignment::family(RayRule::exp_ray(scale), RayRule::exp_ray(scale + gen::uniform(rng, 0, 1)));
    auto b = build(ShiftOperator(make_tilde(), w), -4, 5);
    EXPECT_LE(intertwining_residual(b.s, b.u, b.alpha, b.w), 1e-8);
    EXPECT_LE(isometry_defect(b.s, b.u, b.stable, b.w), 1e-8);
    EXPECT_EQ(b.u.multiplicity.value, 1u);
  }
}

TEST(IsometricAsymptote, MultiplicityMatchesUMatrixCokernel) {
  // Finite-window check of the co-rank formula for U = S_beta on T'.
  auto w = WeightAssignment::family(RayRule::geometric(1.0, 0.5, 2, std::sqrt(0.5)));
  w.primed = RayRule::geometric(1.0, 0.5, 2, std::sqrt(0.5));
  auto b = build(ShiftOperator(make_tilde(true), w), 0, 5);
  ShiftOperator u(make_tilde(true), WeightAssignment::map(b.u.beta, 1.0));
  Eigen::MatrixXd m = dense_truncation(u, b.w);
  // Drop the bottom-level columns: their children lie outside the window.
  const auto bottom = b.w.level_members(b.w.max_level()).size();
  Eigen::MatrixXd inner = m.leftCols(m.cols() - static_cast<Eigen::Index>(bottom));
  EXPECT_EQ(static_cast<std::size_t>(m.rows()) - numerical_rank(inner), b.u.multiplicity.value);
}

TEST(CnuTest, Examples) {
  auto s = ShiftOperator(make_bilateral_path(), WeightAssignment::constant(1.0));
  TreeWindow w(s.tree_ptr(), -3, 3);
  auto alpha = alpha_profile(s, w);
  auto c = cnu_test(s, w, alpha);
  EXPECT_NEAR(c.value, 1.0, 1e-12);
  EXPECT_LE(c.spread, 1e-9);
}

TEST(AdjointAsymptote, BilateralIsSimpleBilateral) {
  ShiftOperator s(make_bilateral_path(), WeightAssignment::constant(1.0));
  auto p = adjoint_profile(s, TreeWindow(s.tree_ptr(), -3, 3));
  auto u = adjoint_isometric_asymptote(s, p);
  EXPECT_EQ(u.type, AdjointShiftType::SimpleBilateral);
  for (const auto& [lvl, c] : u.coefficients) EXPECT_DOUBLE_EQ(c, 1.0);
  EXPECT_LE(adjoint_intertwining_residual(s, u, p), 1e-12);
}

TEST(AdjointAsymptote, CombWithLeafIsSimpleUnilateral) {
  ShiftOperator s(make_comb(2, 4), WeightAssignment::map({}, std::sqrt(0.5)));
  auto p = adjoint_profile(s, TreeWindow(s.tree_ptr(), -3, 4));
  // Ancestral products of sqrt(1/2) diverge, so this one is C.0.
  EXPECT_THROW(adjoint_isometric_asymptote(s, p), Error);

  auto w = WeightAssignment::family(RayRule::geometric(1.0, 0.5, 1, 1.0), RayRule::constant(0.6));
  ShiftOperator t(make_comb(2, 4), w);
  auto q = adjoint_profile(t, TreeWindow(t.tree_ptr(), -3, 4));
  auto u = adjoint_isometric_asymptote(t, q);
  EXPECT_EQ(u.type, AdjointShiftType::SimpleUnilateral);
  EXPECT_LE(adjoint_intertwining_residual(t, u, q), 1e-9);
}

TEST(AdjointAsymptote, RootedIsAdjointStable) {
  ShiftOperator s(make_rooted_path(), WeightAssignment::constant(1.0));
  auto p = adjoint_profile(s, TreeWindow(s.tree_ptr(), 0, 3));
  try {
    adjoint_isometric_asymptote(s, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AdjointStable);
  }
}

TEST(AdjointAsymptote, CoefficientTelescoping) {
  std::map<VertexId, double> values;
  gen::Rng rng(2);
  for (std::int64_t k = -10; k <= 10; ++k) values[VertexId::integer(k)] = gen::uniform(rng, 0.6, 1.0);
  ShiftOperator s(make_bilateral_path(), WeightAssignment::map(values, 1.0));
  auto p = adjoint_profile(s, TreeWindow(s.tree_ptr(), -8, 8));
  auto u = adjoint_isometric_asymptote(s, p);
  double prod = 1.0;
  for (std::int64_t l = 8; l > 3; --l) prod *= u.coefficients.at(l);
  EXPECT_NEAR(prod, std::sqrt(p.at_level(8).estimate / p.at_level(3).estimate), 1e-12);
}

TEST(SimilarToIsometry, Examples) {
  ShiftOperator g(make_rooted_path(), WeightAssignment::family(RayRule::geometric(1.0, 0.5)));
  auto alpha = alpha_profile(g, TreeWindow(g.tree_ptr(), 0, 6));
  auto d = similar_to_isometry(g, alpha);
  EXPECT_EQ(d.decision, Decision::Yes);
  ASSERT_TRUE(d.value);
  EXPECT_NEAR(*d.value, std::exp(-2.0), 1e-9);

  ShiftOperator h(make_rooted_path(), WeightAssignment::constant(0.5));
  EXPECT_EQ(similar_to_isometry(h, alpha_profile(h, TreeWindow(h.tree_ptr(), 0, 6))).decision, Decision::No);

  gen::Rng rng(1);
  auto rt = gen::random_finite_tree(rng, 12);
  ShiftOperator f(rt.tree, gen::make_contractive(*rt.tree, gen::random_map_weights(rng, *rt.tree)));
  EXPECT_EQ(similar_to_isometry(f, alpha_profile(f, TreeWindow::standard(rt.tree))).decision, Decision::No);
}

TEST(SimilarToCoisometry, Examples) {
  EXPECT_EQ(similar_to_coisometry(ShiftOperator(make_tilde(), WeightAssignment::constant(0.5))).decision,
            Decision::No);
  EXPECT_EQ(similar_to_coisometry(ShiftOperator(make_bilateral_path(), WeightAssignment::constant(1.0))).decision,
            Decision::Yes);
  EXPECT_EQ(similar_to_coisometry(ShiftOperator(make_bilateral_path(), WeightAssignment::constant(0.5))).decision,
            Decision::No);
}
