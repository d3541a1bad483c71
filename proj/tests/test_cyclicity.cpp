#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "treeshift/cyclicity.hpp"
#include "treeshift/error.hpp"
#include "treeshift/linalg.hpp"

using namespace treeshift;
using treeshift::gen::Rng;

namespace {

BackwardShiftSpec constant_spec(std::size_t branches, double w, std::size_t len = 600) {
  BackwardShiftSpec spec;
  spec.weights.assign(branches, std::vector<double>(len, w));
  return spec;
}

BackwardShiftSpec random_spec(Rng& rng, std::size_t branches, std::size_t len = 600) {
  BackwardShiftSpec spec;
  spec.weights.assign(branches, std::vector<double>(len));
  for (auto& b : spec.weights)
    for (auto& w : b) w = gen::uniform(rng, 0.5, 1.0);
  return spec;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::InvalidSpec;
}

}  // namespace

TEST(Construct, SigmaBoundsHoldAfterLoop) {
  auto spec = constant_spec(1, 1.0);
  auto c = construct_backward_cyclic(spec, 12);
  for (std::size_t m = 1; m <= 12; ++m) EXPECT_LE(sigma_m(c, spec, m), std::ldexp(1.0, -static_cast<int>(m)));
  for (double xi : c.xi) EXPECT_GT(xi, 0.0);
}

TEST(Construct, ScheduleShape) {
  auto spec = constant_spec(3, 1.0);
  auto c = construct_backward_cyclic(spec, 16);
  for (std::size_t l = 1; l + 1 < c.length(); ++l) {
    EXPECT_GT(c.position[l + 1] - c.position[l], c.position[l] - c.position[l - 1]);
  }
  std::vector<std::size_t> count(3, 0);
  for (auto j : c.branch) ++count[j];
  for (auto n : count) EXPECT_GE(n, (16 + 5) / 6);
}

TEST(Construct, Errors) {
  EXPECT_EQ(code_of([] { construct_backward_cyclic(constant_spec(2, 1.0), 7); }), ErrorCode::ScheduleTooShort);
  auto spec = constant_spec(1, 1.0);
  spec.weights[0][5] = 0.0;
  EXPECT_EQ(code_of([&] { construct_backward_cyclic(spec, 8); }), ErrorCode::ZeroWeight);
  spec.weights[0][5] = 1.5;
  EXPECT_EQ(code_of([&] { spec.validate(); }), ErrorCode::InvalidSpec);
}

TEST(Construct, SecondPassFiresNothing) {
  Rng rng(1);
  for (std::size_t j = 1; j <= 3; ++j) {
    auto spec = random_spec(rng, j);
    auto c = construct_backward_cyclic(spec, 16);
    EXPECT_EQ(rescale_pass(c, spec), 0u);
  }
}

TEST(SigmaM, GeometricExample) {
  // weights 1 and xi_l = 2^-l before any rescaling: Sigma_1 = 4 sum_{l=2}^{L} 4^-l.
  auto spec = constant_spec(1, 1.0);
  CyclicCandidate c;
  for (std::size_t l = 1; l <= 12; ++l) {
    c.branch.push_back(0);
    c.position.push_back(static_cast<std::int64_t>(l * (l + 1) / 2));
    c.xi.push_back(std::ldexp(1.0, -static_cast<int>(l)));
  }
  double expected = 0.0;
  for (int l = 2; l <= 12; ++l) expected += 4.0 * std::ldexp(1.0, -2 * l);
  EXPECT_NEAR(sigma_m(c, spec, 1), expected, 1e-12);
  EXPECT_EQ(sigma_m(c, spec, 12), 0.0);
}

TEST(SigmaM, OrbitIdentity) {
  // (1/(xi_m W)) B^k f - e_{j_m,k_m-k} has squared norm equal to the tail sum
  // at k, and the max over k in (k_{m-1}, k_m] is Sigma_m.
  Rng rng(2);
  for (std::size_t j = 1; j <= 2; ++j) {
    auto spec = random_spec(rng, j, 300);
    auto c = construct_backward_cyclic(spec, 4 * j + 2);
    for (std::size_t m = 1; m <= c.length(); ++m) {
      const std::int64_t lo = m == 1 ? -1 : c.position[m - 2];
      double best = 0.0;
      for (std::int64_t k = lo + 1; k <= c.position[m - 1]; ++k) best = std::max(best, orbit_tail_norm(c, spec, m, k));
      EXPECT_NEAR(best, sigma_m(c, spec, m), 1e-12);
    }
  }
}

TEST(SigmaM, RescalingNeverRaisesEarlierSigmas) {
  Rng rng(3);
  auto spec = random_spec(rng, 2);
  CyclicCandidate c;
  for (std::size_t l = 1; l <= 12; ++l) {
    c.branch.push_back((l - 1) % 2);
    c.position.push_back(static_cast<std::int64_t>(2 * l * (l + 1) / 2));
    c.xi.push_back(std::ldexp(1.0, -static_cast<int>(l)));
  }
  std::vector<double> before;
  for (std::size_t m = 1; m <= 12; ++m) before.push_back(sigma_m(c, spec, m));
  for (std::size_t m = 1; m <= 12; ++m) {
    const double bound = std::ldexp(1.0, -static_cast<int>(m));
    const double sigma = sigma_m(c, spec, m);
    if (sigma > bound)
      for (std::size_t l = m; l < 12; ++l) c.xi[l] /= std::sqrt(sigma / bound);
    for (std::size_t i = 1; i <= 12; ++i) {
      const double now = sigma_m(c, spec, i);
      EXPECT_LE(now, before[i - 1] * (1 + 1e-12) + 1e-300);
      before[i - 1] = now;
    }
  }
}

TEST(Verify, Examples) {
  {
    auto spec = constant_spec(1, 1.0);
    auto v = verify_cyclic_candidate(spec, construct_backward_cyclic(spec, 12), 40);
    EXPECT_EQ(v.rank, 41u);
    EXPECT_LE(v.residual, 1e-6);
  }
  {
    auto spec = constant_spec(2, 0.9);
    auto v = verify_cyclic_candidate(spec, construct_backward_cyclic(spec, 16), 50);
    EXPECT_EQ(v.rank, 102u);
    EXPECT_LE(v.residual, 1e-5);
  }
  {
    auto spec = constant_spec(2, 1.0);
    auto v = verify_cyclic_candidate(spec, construct_backward_cyclic(spec, 16), 60);
    EXPECT_EQ(v.rank, v.dimension);
  }
}

TEST(Verify, ZeroedCoefficientIsDetected) {
  auto spec = constant_spec(2, 1.0);
  auto c = construct_backward_cyclic(spec, 16);
  // Remove every coefficient on branch 1: that branch is never reached.
  for (std::size_t l = 0; l < c.length(); ++l)
    if (c.branch[l] == 1) c.xi[l] = 0.0;
  auto v = verify_cyclic_candidate(spec, c, 50);
  EXPECT_LT(v.rank, v.dimension);
}

TEST(Verify, DimensionCap) {
  auto spec = constant_spec(3, 1.0);
  auto c = construct_backward_cyclic(spec, 16);
  EXPECT_EQ(code_of([&] { verify_cyclic_candidate(spec, c, 50, 1e-8, 100); }), ErrorCode::DimensionCap);
}

TEST(Verify, DenseRangeImageStaysCyclic) {
  // B f passes the same verification when B has dense range on the window.
  auto spec = constant_spec(2, 0.95);
  auto c = construct_backward_cyclic(spec, 16);
  const auto top = c.top();
  Eigen::VectorXd f = candidate_vector(c, 2, top);
  Eigen::VectorXd bf = Eigen::VectorXd::Zero(f.size());
  for (std::size_t j = 0; j < 2; ++j)
    for (std::int64_t k = 1; k <= top; ++k) bf(j * (top + 1) + k - 1) = spec.weight(j, k - 1) * f(j * (top + 1) + k);
  auto v = verify_cyclic_candidate(spec, bf, top, 40);
  EXPECT_EQ(v.rank, v.dimension);
}

TEST(ZeroWeights, OneZeroViaNilpotentSplit) {
  Rng rng(4);
  for (std::size_t j = 1; j <= 3; ++j) {
    auto spec = random_spec(rng, j);
    spec.weights[j - 1][5 + j] = 0.0;
    auto split = construct_with_nilpotent(spec, 16, 50);
    auto v = verify_cyclic_candidate(spec, split.f, split.top, 50);
    EXPECT_EQ(v.rank, v.dimension) << "branches " << j;
    EXPECT_EQ(backward_shift_verdict(spec).kind, VerdictKind::Cyclic);
  }
}

TEST(ZeroWeights, TwoZerosNeverCyclic) {
  Rng rng(5);
  auto spec = random_spec(rng, 2, 400);
  spec.weights[0][3] = 0.0;
  spec.weights[1][9] = 0.0;
  EXPECT_GE(backward_cokernel(spec, 50), 2u);
  EXPECT_EQ(backward_shift_verdict(spec).kind, VerdictKind::NonCyclic);
  const std::int64_t top = 200;
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::VectorXd x(2 * (top + 1));
    for (auto& c : x) c = gen::uniform(rng, -1.0, 1.0);
    auto v = verify_cyclic_candidate(spec, x, top, 50);
    EXPECT_LT(v.rank, v.dimension);
  }
}

TEST(ZeroWeights, NilpotentSumRule) {
  // Cyclic dense-range truncation plus a zero-diagonal Jordan block: the
  // concatenated vector f + e_top stays cyclic.
  auto spec = constant_spec(1, 1.0);
  spec.weights[0][4] = 0.0;
  auto split = construct_with_nilpotent(spec, 12, 30);
  EXPECT_EQ(split.f(4), 1.0);
  EXPECT_EQ(verify_cyclic_candidate(spec, split.f, split.top, 30).rank, 31u);
}

TEST(RangeMembership, FiniteSums) {
  auto spec = constant_spec(1, 1.0);
  auto c = construct_backward_cyclic(spec, 12);
  for (double sum : range_membership_sums(spec, c, 5)) EXPECT_TRUE(std::isfinite(sum));
}

TEST(WindowCorank, Examples) {
  ShiftOperator path(make_bilateral_path(), WeightAssignment::constant(0.7));
  EXPECT_EQ(window_corank(path, TreeWindow(path.tree_ptr(), -5, 5)).adjusted, 0u);
  ShiftOperator tilde(make_tilde(), WeightAssignment::constant(0.7));
  EXPECT_EQ(window_corank(tilde, TreeWindow(tilde.tree_ptr(), -5, 5)).adjusted, 1u);
  Rng rng(6);
  auto rt = gen::random_finite_tree(rng, 40);
  ShiftOperator f(rt.tree, gen::random_map_weights(rng, *rt.tree, 0.1, 1.0));
  EXPECT_EQ(window_corank(f, TreeWindow::standard(rt.tree)).adjusted, 1 + rt.tree->symbolic_branching()->value);
}

TEST(Verdict, FamilyExamples) {
  Classification c1;
  c1.forward = ForwardClass::C1dot;
  c1.adjoint = AdjointClass::Cdot0;
  auto bin = ShiftOperator(make_rootless_binary(), WeightAssignment::constant(std::sqrt(0.5)));
  EXPECT_EQ(cyclicity_verdict(bin, c1).rule, "R2");

  auto comb = ShiftOperator(make_comb(2, 5), WeightAssignment::constant(0.9));
  auto v = cyclicity_verdict(comb, Classification{});
  EXPECT_EQ(v.kind, VerdictKind::Cyclic);
  EXPECT_EQ(v.rule, "R4");
  EXPECT_EQ(v.anchors, std::vector<std::string>{"Thm 6.2"});

  auto tilde = ShiftOperator(make_tilde(), WeightAssignment::family(RayRule::exp_ray(1.5)));
  auto t = cyclicity_verdict(tilde, c1);
  EXPECT_EQ(t.kind, VerdictKind::NonCyclic);
  EXPECT_EQ(t.rule, "R6");
}

TEST(Verdict, BilateralOutsideCdot1IsUnknown) {
  Classification c;
  c.forward = ForwardClass::C0dot;
  c.adjoint = AdjointClass::Cdot0;
  auto s = ShiftOperator(make_bilateral_path(), WeightAssignment::constant(0.5));
  auto v = cyclicity_verdict(s, c);
  EXPECT_EQ(v.kind, VerdictKind::Unknown);
  EXPECT_FALSE(v.blockers.empty());
}

TEST(RaySwap, CommutesWhenRaysAgree) {
  auto s = ShiftOperator(make_tilde(), WeightAssignment::constant(0.7));
  EXPECT_LE(ray_swap_commutator(s, TreeWindow(s.tree_ptr(), -3, 5)), 1e-12);
  auto t = ShiftOperator(make_tilde(), WeightAssignment::family(RayRule::constant(0.7), RayRule::constant(0.6)));
  EXPECT_GT(ray_swap_commutator(t, TreeWindow(t.tree_ptr(), -3, 5)), 0.05);
}
