#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "treeshift/shift.hpp"
#include "treeshift/window.hpp"

namespace treeshift {

/// g_k = (prod_{j<=k} 1/lambda_j) e_k - (prod_{j<=k} 1/lambda_{j'}) e_{k'}.
/// S* g_k = g_{k-1} and S* g_1 = 0.
struct GVector {
  std::int64_t k = 1;
  SparseVector g;
  double norm = 0.0;
};

/// Requires a spine tree whose vertex 0 has children 1 and 1'; throws
/// ShapeMismatch otherwise or when k or k' is missing.
GVector g_vector(const ShiftOperator& s, std::int64_t k);

/// R_k = prod_{j<=k} lambda_{j'} / lambda_j.
double ray_ratio(const ShiftOperator& s, std::int64_t k);

enum class RatioKind { Bounded, UnboundedEvidence, Inconclusive };
std::string_view ratio_kind_name(RatioKind k);

/// Boundedness of k -> R_k. `sup` is the largest partial ratio seen;
/// `certified` marks answers backed by a tail bound rather than the scan.
struct RatioCertificate {
  RatioKind kind = RatioKind::Inconclusive;
  double sup = 0.0;
  /// Bound on sup_k R_k when Bounded.
  double bound = 0.0;
  /// First index where R_k exceeded the blow-up bound.
  std::int64_t k = 0;
  double value = 0.0;
  bool certified = false;
  std::string reason;
};

RatioCertificate ratio_bounded(const ShiftOperator& s, std::int64_t horizon = 200, double blowup = 1e6);

enum class SimilarityTarget { LeafSum, TildeSum };
enum class WitnessMode { Similar, QuasiaffineOnly };
std::string_view witness_mode_name(WitnessMode m);

/// X restricted to span{e_k, e_k'} is [[1, R_k c], [0, -c]] with
/// c = 1/sqrt(1 + R_k^2); its inverse has norm at most sqrt(2 (1 + R_k^2)).
struct BlockCertificate {
  std::int64_t k = 0;
  double determinant = 0.0;
  double inverse_bound = 0.0;
};

/// The operator Y with Y e_{k'} = g_k / ||g_k|| and Y e_n = e_n, together
/// with the weighted shift it intertwines: S* Y = Y T*. For leaf trees Y is the
/// similarity with the two-ray shift plus a nilpotent block; on the tilde
/// tree it is the adjoint of the quasiaffinity.
struct SimilarityWitness {
  SimilarityTarget target = SimilarityTarget::LeafSum;
  TreeWindow window;
  /// Target shift weights keyed by the child vertex: n has parent n-1, and
  /// (k+1)' has parent k'. 1' has no parent in the target.
  std::map<VertexId, double> target_weights{};
  std::vector<GVector> g{};
  double residual = 0.0;
  WitnessMode mode = WitnessMode::QuasiaffineOnly;
  std::vector<BlockCertificate> blocks{};
  /// Uniform bound on ||Y^{-1}|| from the ratio certificate.
  std::optional<double> inverse_bound{};
  double condition_estimate = 0.0;
  std::size_t window_rank = 0;
  RatioCertificate ratio{};

  Eigen::MatrixXd dense() const;
  /// Matrix of P T* P on the window.
  Eigen::MatrixXd target_adjoint_dense() const;
};

/// Comb tree with a primed leaf k0' (and optionally a spine leaf j0 >= k0):
/// S is similar to the two-ray shift plus a nilpotent block. `levels` bounds the spine window from above and
/// below.
SimilarityWitness build_leaf_similarity(const ShiftOperator& s, std::int64_t levels = 12);

/// Tilde tree: S is a quasiaffine transform of the two-ray shift, similar to it when the
/// ratio sequence is bounded. Throws NotAContraction for non-contractive S.
SimilarityWitness build_tilde_quasiaffinity(const ShiftOperator& s, std::int64_t levels = 12,
                                            std::int64_t horizon = 200);

/// x = e + g with e in span{e_n} and g in span{g_k}. mu_k is the
/// coefficient of g_k/||g_k|| in g, nu_n the coefficient of e_n in e.
struct DirectSumDecomposition {
  SparseVector e_part;
  SparseVector g_part;
  std::map<std::int64_t, double> mu;
  std::map<std::int64_t, double> nu;
  /// sum mu_k^2 / ||g_k||^2 and sum nu_k^2 over k >= 1.
  double mu_sum = 0.0;
  double nu_sum = 0.0;
  double residual = 0.0;
};

DirectSumDecomposition direct_sum_decomposition(const SparseVector& x, const ShiftOperator& s);

/// Krylov ranks of T* at x and of S* at Y x on the witness window.
struct KrylovTransfer {
  std::size_t target_rank = 0;
  std::size_t source_rank = 0;
};

KrylovTransfer krylov_transfer(const ShiftOperator& s, const SimilarityWitness& w, const Eigen::VectorXd& x,
                               double rank_tol = 1e-8);

}  // namespace treeshift
