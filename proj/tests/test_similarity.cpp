#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "treeshift/error.hpp"
#include "treeshift/linalg.hpp"
#include "treeshift/similarity.hpp"

using namespace treeshift;

namespace {

ShiftOperator tilde_with(RayRule spine, RayRule primed) {
  return ShiftOperator(make_tilde(), WeightAssignment::family(spine, primed));
}

}  // namespace

TEST(GVector, SmallExample) {
  auto s = tilde_with(RayRule::constant(0.5), RayRule::constant(1.0));
  EXPECT_NEAR(g_vector(s, 1).norm, std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(g_vector(s, 2).norm, std::sqrt(17.0), 1e-12);
  EXPECT_NEAR(g_vector(s, 2).g[VertexId::integer(2)], 4.0, 1e-12);
  EXPECT_NEAR(g_vector(s, 2).g[VertexId::primed(2)], -1.0, 1e-12);
}

TEST(GVector, AdjointLowersIndex) {
  gen::Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    auto s = tilde_with(RayRule::geometric(gen::uniform(rng, 0.1, 1.0), gen::uniform(rng, 0.3, 0.9)),
                        RayRule::constant(gen::uniform(rng, 0.3, 1.0)));
    EXPECT_LE(apply_adjoint(s, g_vector(s, 1).g).norm(), 1e-12);
    for (std::int64_t k = 2; k <= 15; ++k) {
      auto lhs = apply_adjoint(s, g_vector(s, k).g);
      EXPECT_LE((lhs - g_vector(s, k - 1).g).norm(), 1e-9 * g_vector(s, k).norm);
    }
  }
}

TEST(GVector, ShapeMismatch) {
  ShiftOperator path(make_bilateral_path(), WeightAssignment::constant(0.5));
  EXPECT_THROW(g_vector(path, 1), Error);
  ShiftOperator comb(make_comb(3, std::nullopt), WeightAssignment::constant(0.5));
  EXPECT_THROW(g_vector(comb, 4), Error);
}

TEST(RatioBounded, BlowUpIndex) {
  auto s = tilde_with(RayRule::constant(0.5), RayRule::constant(1.0));
  auto r = ratio_bounded(s);
  EXPECT_EQ(r.kind, RatioKind::UnboundedEvidence);
  EXPECT_EQ(r.k, 20);
  EXPECT_DOUBLE_EQ(r.value, std::ldexp(1.0, 20));
}

TEST(RatioBounded, SummableSpineDefectIsBounded) {
  // spine lambda_j = exp(-2^-j), primed lambda = 1: R_k rises to e^(1 - 2^-k) < e.
  auto up = tilde_with(RayRule::geometric(1.0, 0.5), RayRule::constant(1.0));
  auto r = ratio_bounded(up);
  EXPECT_EQ(r.kind, RatioKind::Bounded);
  EXPECT_LE(r.sup, std::exp(1.0) + 1e-12);
  // Swapped: R_k <= 1.
  auto down = tilde_with(RayRule::constant(1.0), RayRule::geometric(1.0, 0.5));
  auto d = ratio_bounded(down);
  EXPECT_EQ(d.kind, RatioKind::Bounded);
  EXPECT_LE(d.bound, 1.0 + 1e-12);
  EXPECT_TRUE(d.certified);
}

TEST(RatioBounded, IdenticalRays) {
  auto s = tilde_with(RayRule::exp_ray(0.7), RayRule::exp_ray(0.7));
  auto r = ratio_bounded(s);
  EXPECT_EQ(r.kind, RatioKind::Bounded);
  EXPECT_NEAR(r.bound, 1.0, 1e-12);
}

TEST(RatioBounded, MatchesDirectProducts) {
  gen::Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    auto spine = RayRule::constant(gen::uniform(rng, 0.2, 1.0));
    auto primed = RayRule::constant(gen::uniform(rng, 0.2, 1.0));
    auto s = tilde_with(spine, primed);
    double prod = 1.0;
    for (std::int64_t k = 1; k <= 30; ++k) {
      prod *= primed.value / spine.value;
      EXPECT_NEAR(ray_ratio(s, k), prod, 1e-9 * prod);
    }
    auto r = ratio_bounded(s);
    EXPECT_EQ(r.kind == RatioKind::Bounded, primed.value <= spine.value);
  }
}

TEST(LeafSimilarity, IntertwinesOnWindow) {
  gen::Rng rng(3);
  for (int trial = 0; trial < 8; ++trial) {
    const std::int64_t k0 = 1 + trial % 4;
    auto s = ShiftOperator(make_comb(k0, std::nullopt),
                           WeightAssignment::family(RayRule::constant(gen::uniform(rng, 0.3, 1.0)),
                                                    RayRule::constant(gen::uniform(rng, 0.3, 1.0))));
    auto w = build_leaf_similarity(s, 8);
    EXPECT_LE(w.residual, 1e-10);
    EXPECT_EQ(w.mode, WitnessMode::Similar);
    EXPECT_EQ(w.window_rank, static_cast<std::size_t>(w.dense().cols()));
    for (const auto& b : w.blocks) {
      const double r = ray_ratio(s, b.k);
      EXPECT_NEAR(b.determinant, -1.0 / std::sqrt(1 + r * r), 1e-12);
      EXPECT_NEAR(b.inverse_bound, std::sqrt(2 * (1 + r * r)), 1e-12);
    }
  }
}

TEST(TildeQuasiaffinity, FullRankAndTransfer) {
  auto s = tilde_with(RayRule::geometric(0.4, 0.5), RayRule::constant(0.5));
  auto w = build_tilde_quasiaffinity(s, 10);
  EXPECT_LE(w.residual, 1e-10);
  EXPECT_EQ(w.window_rank, static_cast<std::size_t>(w.dense().cols()));
  EXPECT_EQ(w.mode, WitnessMode::Similar);
  ASSERT_TRUE(w.inverse_bound.has_value());

  gen::Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd x(w.dense().cols());
    for (auto& c : x) c = gen::uniform(rng, -1, 1);
    auto t = krylov_transfer(s, w, x);
    EXPECT_EQ(t.target_rank, t.source_rank);
  }
}

TEST(TildeQuasiaffinity, UnboundedRatioIsOnlyQuasiaffine) {
  auto s = tilde_with(RayRule::constant(0.5), RayRule::constant(0.8));
  auto w = build_tilde_quasiaffinity(s, 10);
  EXPECT_EQ(w.mode, WitnessMode::QuasiaffineOnly);
  EXPECT_FALSE(w.inverse_bound.has_value());
  EXPECT_LE(w.residual, 1e-8 * w.condition_estimate);
}

TEST(TildeQuasiaffinity, Errors) {
  ShiftOperator bin(make_rootless_binary(), WeightAssignment::constant(std::sqrt(0.5)));
  EXPECT_THROW(build_tilde_quasiaffinity(bin), Error);
  try {
    build_tilde_quasiaffinity(tilde_with(RayRule::constant(2.0), RayRule::constant(1.0)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotAContraction);
  }
}

TEST(DirectSum, SpineVectorIsPureE) {
  auto s = tilde_with(RayRule::constant(0.5), RayRule::constant(1.0));
  auto d = direct_sum_decomposition(SparseVector::basis(VertexId::integer(5)), s);
  EXPECT_NEAR(d.nu.at(5), 1.0, 1e-12);
  EXPECT_NEAR(d.mu_sum, 0.0, 1e-12);
  EXPECT_LE(d.residual, 1e-12);
}

TEST(DirectSum, GVectorIsPureG) {
  auto s = tilde_with(RayRule::constant(0.5), RayRule::constant(1.0));
  auto g3 = g_vector(s, 3);
  auto d = direct_sum_decomposition(g3.g, s);
  EXPECT_NEAR(d.mu.at(3), g3.norm, 1e-9);
  EXPECT_NEAR(d.nu_sum, 0.0, 1e-9);
  EXPECT_LE(d.residual, 1e-9);
}

TEST(DirectSum, ReconstructsRandomVectors) {
  gen::Rng rng(5);
  auto s = tilde_with(RayRule::constant(0.8), RayRule::constant(0.6));
  for (int trial = 0; trial < 20; ++trial) {
    SparseVector x;
    for (std::int64_t k = -3; k <= 8; ++k) x.add(VertexId::integer(k), gen::uniform(rng, -1, 1));
    for (std::int64_t k = 1; k <= 8; ++k) x.add(VertexId::primed(k), gen::uniform(rng, -1, 1));
    auto d = direct_sum_decomposition(x, s);
    EXPECT_LE((d.e_part + d.g_part - x).norm(), 1e-10);
    for (const auto& [v, c] : d.e_part) EXPECT_NE(s.tree().branch_of(v), RayBranch::Primed);
  }
}
