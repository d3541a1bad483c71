#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "treeshift/asymptotics.hpp"
#include "treeshift/error.hpp"

using namespace treeshift;
using treeshift::gen::Rng;

namespace {

ShiftOperator binary_isometry() {
  return ShiftOperator(make_rootless_binary(), WeightAssignment::constant(std::sqrt(0.5)));
}

// lambda_{k+1} = exp(-2^{-(k+1)}) on a rooted path.
ShiftOperator geometric_path() {
  return ShiftOperator(make_rooted_path(), WeightAssignment::family(RayRule::geometric(1.0, 0.5)));
}

double alpha_sum(const ShiftOperator& s, const VertexId& u, const AsymptoticProfile& p) {
  double sum = 0.0;
  for (const auto& [c, w] : s.weighted_children(u)) sum += w * w * p.at(c).estimate;
  return sum;
}

}  // namespace

TEST(Alpha, IsometryGivesOne) {
  auto s = binary_isometry();
  auto p = alpha_profile(s, TreeWindow(s.tree_ptr(), -2, 2, 16));
  for (const auto& e : p.entries) {
    EXPECT_EQ(e.status, Status::ExactOne);
    EXPECT_DOUBLE_EQ(e.estimate, 1.0);
  }
}

TEST(Alpha, FiniteTreeGivesZero) {
  Rng rng(1);
  auto rt = gen::random_finite_tree(rng, 30);
  ShiftOperator s(rt.tree, gen::make_contractive(*rt.tree, gen::random_map_weights(rng, *rt.tree)));
  auto p = alpha_profile(s, TreeWindow::standard(rt.tree));
  for (const auto& e : p.entries) {
    EXPECT_EQ(e.status, Status::ExactZero);
    EXPECT_EQ(e.estimate, 0.0);
  }
}

TEST(Alpha, GeometricPathClosedForm) {
  auto s = geometric_path();
  auto p = alpha_profile(s, TreeWindow(s.tree_ptr(), 0, 8));
  for (const auto& e : p.entries) {
    const double expected = std::exp(-std::ldexp(1.0, 1 - static_cast<int>(e.level)));
    EXPECT_NEAR(e.estimate, expected, 1e-8) << e.vertex;
  }
}

TEST(Alpha, NumericIterationOnFiniteMapWithFallback) {
  // A path whose first weights are explicit and whose tail is constant 1.
  std::map<VertexId, double> values{{VertexId("1"), 0.5}, {VertexId("2"), 0.8}};
  ShiftOperator s(make_rooted_path(), WeightAssignment::map(values, 1.0));
  auto e = alpha_entry(s, VertexId("0"));
  EXPECT_NEAR(e.estimate, 0.25 * 0.64, 1e-12);
  auto w = alpha_entry(s, VertexId("5"));
  EXPECT_NEAR(w.estimate, 1.0, 1e-12);
}

TEST(Alpha, PartialSumsAreMonotone) {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    auto t = make_tilde();
    ShiftOperator s(t, gen::random_spine_weights(rng, *t, 12, 0.6, 1.0, 0.7));
    for (const auto& u : {VertexId("-2"), VertexId("0"), VertexId("3'"), VertexId("2")}) {
      double prev = 1.0;
      for (std::size_t n = 1; n <= 20; ++n) {
        const double sn = alpha_partial_sum(s, u, n);
        EXPECT_LE(sn, prev + 1e-12);
        prev = sn;
      }
    }
  }
}

TEST(Alpha, RecursionHoldsOnContractiveInstances) {
  Rng rng(3);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<ShiftOperator> ops;
    auto t = make_tilde();
    ops.emplace_back(t, gen::random_spine_weights(rng, *t, 10, 0.7, 1.0, 0.7));
    auto c = make_comb(3, std::nullopt);
    ops.emplace_back(c, gen::random_spine_weights(rng, *c, 10, 0.7, 1.0, 0.7));
    ops.emplace_back(make_bilateral_path(), WeightAssignment::family(RayRule::exp_ray(gen::uniform(rng, 0.2, 2.0))));
    for (const auto& s : ops) {
      TreeWindow w(s.tree_ptr(), -3, 4, 16);
      auto p = alpha_profile(s, w);
      for (const auto& u : w.interior()) EXPECT_NEAR(p.at(u).estimate, alpha_sum(s, u, p), 1e-9) << u;
    }
  }
}

TEST(Alpha, RequiresContraction) {
  ShiftOperator s(make_rooted_path(), WeightAssignment::constant(1.5));
  EXPECT_THROW(alpha_profile(s, TreeWindow(s.tree_ptr(), 0, 3)), Error);
}

TEST(StableSubtree, Examples) {
  auto s = binary_isometry();
  TreeWindow w(s.tree_ptr(), -2, 2, 16);
  auto st = stable_subtree(s, w, alpha_profile(s, w));
  EXPECT_EQ(st.members.size(), w.size());
  EXPECT_TRUE(st.branching.infinite);

  Rng rng(4);
  auto rt = gen::random_finite_tree(rng, 20);
  ShiftOperator f(rt.tree, gen::make_contractive(*rt.tree, gen::random_map_weights(rng, *rt.tree)));
  auto fw = TreeWindow::standard(rt.tree);
  EXPECT_TRUE(stable_subtree(f, fw, alpha_profile(f, fw)).empty());

  // lambda_k = 1 for k <= 0 and exp(-2^{-k}) for k > 0.
  ShiftOperator b(make_bilateral_path(), WeightAssignment::family(RayRule::geometric(1.0, 0.5, 1, 1.0)));
  TreeWindow bw(b.tree_ptr(), -4, 4);
  auto bst = stable_subtree(b, bw, alpha_profile(b, bw));
  EXPECT_EQ(bst.members.size(), bw.size());
  EXPECT_EQ(bst.branching.value, 0u);
}

TEST(Adjoint, RootedIsZero) {
  auto s = geometric_path();
  auto p = adjoint_profile(s, TreeWindow(s.tree_ptr(), 0, 4));
  EXPECT_TRUE(p.rooted);
  for (const auto& e : p.levels) {
    EXPECT_EQ(e.status, Status::ExactZero);
    EXPECT_TRUE(e.certified);
  }
}

TEST(Adjoint, BilateralProductFormula) {
  Rng rng(5);
  std::map<VertexId, double> values;
  std::map<std::int64_t, double> w;
  for (std::int64_t k = -20; k <= 20; ++k) values[VertexId::integer(k)] = w[k] = gen::uniform(rng, 0.5, 1.0);
  ShiftOperator s(make_bilateral_path(), WeightAssignment::map(values, 1.0));
  auto p = adjoint_profile(s, TreeWindow(s.tree_ptr(), -20, 20));
  for (const auto& e : p.levels) {
    double prod = 1.0;
    for (std::int64_t j = -20; j <= e.level; ++j) prod *= w[j] * w[j];
    EXPECT_NEAR(e.estimate, prod, 1e-10) << e.level;
  }
}

TEST(Adjoint, UnitaryBilateral) {
  ShiftOperator s(make_bilateral_path(), WeightAssignment::constant(1.0));
  auto p = adjoint_profile(s, TreeWindow(s.tree_ptr(), -3, 3));
  for (const auto& e : p.levels) EXPECT_DOUBLE_EQ(e.estimate, 1.0);
  const auto& h = p.h_at_level(2);
  EXPECT_EQ(h.h.size(), 1u);
  EXPECT_DOUBLE_EQ(h.h[VertexId("2")], 1.0);
}

TEST(Adjoint, LevelConstancyAndAllOrNothing) {
  Rng rng(6);
  for (int trial = 0; trial < 6; ++trial) {
    auto t = make_tilde();
    ShiftOperator s(t, gen::random_spine_weights(rng, *t, 8, 0.6, 1.0, 0.7));
    auto p = adjoint_profile(s, TreeWindow(s.tree_ptr(), -3, 4, 8));
    bool any_positive = false;
    bool any_zero = false;
    for (const auto& e : p.levels) (e.estimate > 1e-9 ? any_positive : any_zero) = true;
    EXPECT_FALSE(any_positive && any_zero);
    // Level representatives agree with each generation member.
    for (const auto& hv : p.h) {
      double norm2 = hv.h.norm_squared();
      EXPECT_NEAR(norm2, p.at_level(hv.level).estimate, 1e-10);
    }
  }
}

TEST(Classify, Examples) {
  {
    Rng rng(7);
    auto rt = gen::random_finite_tree(rng, 15);
    ShiftOperator s(rt.tree, gen::make_contractive(*rt.tree, gen::random_map_weights(rng, *rt.tree)));
    auto w = TreeWindow::standard(rt.tree);
    auto c = classify(s, alpha_profile(s, w), adjoint_profile(s, w));
    EXPECT_EQ(c.forward, ForwardClass::C0dot);
    EXPECT_TRUE(c.forward_certified);
    EXPECT_EQ(c.adjoint, AdjointClass::Cdot0);
    EXPECT_TRUE(c.adjoint_certified);
  }
  {
    auto s = binary_isometry();
    TreeWindow w(s.tree_ptr(), -2, 2, 16);
    auto c = classify(s, alpha_profile(s, w), adjoint_profile(s, w));
    EXPECT_EQ(c.forward, ForwardClass::C1dot);
    EXPECT_EQ(c.adjoint, AdjointClass::Cdot0);
  }
  {
    ShiftOperator s(make_bilateral_path(), WeightAssignment::constant(1.0));
    TreeWindow w(s.tree_ptr(), -3, 3);
    auto c = classify(s, alpha_profile(s, w), adjoint_profile(s, w));
    EXPECT_EQ(c.forward, ForwardClass::C1dot);
    EXPECT_EQ(c.adjoint, AdjointClass::Cdot1);
  }
}

TEST(Classify, DenseOracleOnFiniteTrees) {
  // On a finite tree (M^T)^n M^n vanishes once n exceeds the height.
  Rng rng(8);
  auto rt = gen::random_finite_tree(rng, 30, 3);
  ShiftOperator s(rt.tree, gen::make_contractive(*rt.tree, gen::random_map_weights(rng, *rt.tree)));
  auto m = dense_truncation(s, TreeWindow::standard(rt.tree));
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(m.rows(), m.cols());
  for (std::int64_t i = 0; i <= rt.tree->height(); ++i) p = m * p;
  EXPECT_EQ((p.transpose() * p).cwiseAbs().maxCoeff(), 0.0);
}
