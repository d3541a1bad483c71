#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "treeshift/asymptotics.hpp"
#include "treeshift/linalg.hpp"

namespace treeshift {

/// Backward shift on finitely many branches: B e_{j,0} = 0 and
/// B e_{j,k} = w_{j,k-1} e_{j,k-1}. Weights past the materialized ones equal
/// `tail`. Zero weights are allowed here.
struct BackwardShiftSpec {
  std::vector<std::vector<double>> weights;
  double tail = 1.0;

  std::size_t branches() const { return weights.size(); }
  double weight(std::size_t j, std::int64_t k) const;
  /// (branch, index) of every zero weight, including a zero tail on each branch.
  std::vector<std::pair<std::size_t, std::int64_t>> zero_weights() const;
  /// Throws InvalidSpec for negative or non-finite weights.
  void validate() const;
};

struct Rescaling {
  std::size_t m = 0;
  double sigma = 0.0;
  double factor = 1.0;
};

/// f = sum_l xi_l e_{j_l, k_l} with k_l = |J| l (l+1) / 2 and round-robin j_l.
struct CyclicCandidate {
  std::vector<std::size_t> branch;
  std::vector<std::int64_t> position;
  std::vector<double> xi;
  std::vector<Rescaling> log;

  std::size_t length() const { return xi.size(); }
  std::int64_t top() const { return position.empty() ? 0 : position.back(); }
};

/// Builds the candidate and runs the sequential rescaling so that
/// sigma_m <= 2^-m for every m <= L. Throws ZeroWeight, ScheduleTooShort.
CyclicCandidate construct_backward_cyclic(const BackwardShiftSpec& spec, std::size_t length);

/// max over k_{m-1} < k <= k_m (k_0 = -1) of
/// sum_{l>m} (xi_l W(l,k) / (xi_m W(m,k)))^2 with W(l,k) = w_{j_l,k_l-1} ... w_{j_l,k_l-k}.
/// m is 1-based.
double sigma_m(const CyclicCandidate& c, const BackwardShiftSpec& spec, std::size_t m);

/// One pass of the rescaling loop over an existing candidate; returns the
/// number of rescalings that fired.
std::size_t rescale_pass(CyclicCandidate& c, const BackwardShiftSpec& spec);

/// Squared norm of (1/(xi_m W(m,k))) B^k f - e_{j_m,k_m-k} computed from the
/// orbit, to compare with the tail sum inside sigma_m.
double orbit_tail_norm(const CyclicCandidate& c, const BackwardShiftSpec& spec, std::size_t m, std::int64_t k);

struct CyclicVerification {
  std::size_t dimension = 0;
  std::size_t rank = 0;
  double residual = 0.0;
  std::size_t orbit_length = 0;
  bool cyclic() const { return rank == dimension; }
};

/// Rank and projection residual of {P_K B^n f : n >= 0} on the window
/// {e_{j,k} : k <= K}. Throws DimensionCap.
CyclicVerification verify_cyclic_candidate(const BackwardShiftSpec& spec, const Eigen::VectorXd& f,
                                           std::int64_t top, std::int64_t window_k,
                                           double rank_tol = kDefaultRankTol, std::size_t cap = 4096);
CyclicVerification verify_cyclic_candidate(const BackwardShiftSpec& spec, const CyclicCandidate& c,
                                           std::int64_t window_k, double rank_tol = kDefaultRankTol,
                                           std::size_t cap = 4096);

/// Dense vector of the candidate over indices k <= top on every branch,
/// laid out branch-major.
Eigen::VectorXd candidate_vector(const CyclicCandidate& c, std::size_t branches, std::int64_t top);
/// P_K B P_K in the same layout.
Eigen::MatrixXd backward_matrix(const BackwardShiftSpec& spec, std::int64_t window_k);

/// Cyclic candidate for a backward shift with exactly one zero weight: the
/// positive part below the zero is built as above and the finite chain
/// above it gets its top basis vector.
struct ZeroSplitCandidate {
  Eigen::VectorXd f;
  std::int64_t top = 0;
  CyclicCandidate positive_part;
};
ZeroSplitCandidate construct_with_nilpotent(const BackwardShiftSpec& spec, std::size_t length, std::int64_t window_k);

/// Co-dimension of the range of B on the window, minus the one missing
/// top index per branch that only the truncation causes.
std::size_t backward_cokernel(const BackwardShiftSpec& spec, std::int64_t window_k, double rank_tol = kDefaultRankTol);

/// Sums sum_l xi_l^2 / (w_{j_l,k_l} ... w_{j_l,k_l+n-1})^2 for n = 1..n_max;
/// finite values mean the truncated candidate lies in the range of B^n.
std::vector<double> range_membership_sums(const BackwardShiftSpec& spec, const CyclicCandidate& c, std::size_t n_max);

/// Co-rank of the window matrix of S minus the deficiencies caused by
/// window vertices whose parent lies outside the window.
struct WindowCorank {
  std::size_t raw = 0;
  std::size_t boundary = 0;
  std::size_t adjusted = 0;
};
WindowCorank window_corank(const ShiftOperator& s, const TreeWindow& window, double rank_tol = kDefaultRankTol);

enum class VerdictKind { Cyclic, NonCyclic, AdjointCyclic, Unknown };
std::string_view verdict_name(VerdictKind k);

struct Verdict {
  VerdictKind kind = VerdictKind::Unknown;
  std::string rule;
  std::vector<std::string> anchors;
  std::string reason;
  std::vector<std::string> blockers;
};

/// First matching rule among R1..R8 (with R5' for bilateral C.1 shifts).
Verdict cyclicity_verdict(const ShiftOperator& s, const Classification& c);
/// Verdict for a standalone backward shift (at most one zero weight).
Verdict backward_shift_verdict(const BackwardShiftSpec& spec);

/// max ||S R e_u - R S e_u|| over interior window vertices, where R swaps
/// k and k' on the two rays below the branching vertex of a tilde-shaped tree.
double ray_swap_commutator(const ShiftOperator& s, const TreeWindow& window);

}  // namespace treeshift
