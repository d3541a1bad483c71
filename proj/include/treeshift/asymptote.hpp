#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "treeshift/asymptotics.hpp"

namespace treeshift {

enum class AsymptoteType { UnilateralShift, CnuUnilateral, BilateralPlusUnilateral };
std::string_view asymptote_name(AsymptoteType t);

/// Value of sum_{v in Gen_{T'}(u)} prod_j beta_{Par^j v}^2, evaluated by
/// telescoping the beta products into alpha ratios at `depth` levels above
/// each window level.
struct CnuTest {
  double value = 0.0;
  std::map<std::int64_t, double> per_level;
  /// max - min over the window levels.
  double spread = 0.0;
  std::size_t depth = 0;
};

/// The isometric asymptote U = S_beta on the stable subtree T'.
struct AsymptoteDescriptor {
  std::map<VertexId, double> beta;
  /// V' vertices whose beta needs an unconverged alpha.
  std::vector<VertexId> unavailable;
  AsymptoteType type = AsymptoteType::UnilateralShift;
  BranchingCount multiplicity;
  CnuTest cnu;
};

/// Throws StableSubtreeEmpty when V' is empty.
AsymptoteDescriptor isometric_asymptote(const ShiftOperator& s, const TreeWindow& window,
                                        const AsymptoticProfile& alpha, const StableSubtree& stable,
                                        const Tolerances& tol = {});

CnuTest cnu_test(const ShiftOperator& s, const TreeWindow& window, const AsymptoticProfile& alpha,
                 std::size_t depth = 64, const Tolerances& tol = {});

enum class AdjointShiftType { SimpleUnilateral, SimpleBilateral };
std::string_view adjoint_shift_name(AdjointShiftType t);

/// U_* h_u = sqrt(a_u / a_{Par u}) h_{Par u}; coefficients keyed by the level
/// of u.
struct AdjointAsymptoteDescriptor {
  AdjointShiftType type = AdjointShiftType::SimpleBilateral;
  std::map<std::int64_t, double> coefficients;
  std::optional<std::int64_t> last_level;
};

/// Throws AdjointStable when S is in C.0.
AdjointAsymptoteDescriptor adjoint_isometric_asymptote(const ShiftOperator& s, const AdjointProfile& adjoint,
                                                       const Tolerances& tol = {});

/// max over interior window vertices of ||A^{1/2} S e_u - U A^{1/2} e_u||.
double intertwining_residual(const ShiftOperator& s, const AsymptoteDescriptor& u, const AsymptoticProfile& alpha,
                             const TreeWindow& window);

/// max over levels of ||A_*^{1/2} S* h_u - U_* A_*^{1/2} h_u||, using levels
/// whose generation is fully materialized.
double adjoint_intertwining_residual(const ShiftOperator& s, const AdjointAsymptoteDescriptor& u,
                                     const AdjointProfile& adjoint);

/// Largest |sum_{v in Chi_{T'}(u)} beta_v^2 - 1| over interior V' vertices.
double isometry_defect(const ShiftOperator& s, const AsymptoteDescriptor& u, const StableSubtree& stable,
                       const TreeWindow& window);

enum class Decision { Yes, No, Undetermined };
std::string_view decision_name(Decision d);

struct SimilarityDecision {
  Decision decision = Decision::Undetermined;
  /// inf alpha (isometry test) or the relevant product (co-isometry test).
  std::optional<double> value;
  std::string reason;
};

SimilarityDecision similar_to_isometry(const ShiftOperator& s, const AsymptoticProfile& alpha,
                                       const Tolerances& tol = {});
SimilarityDecision similar_to_coisometry(const ShiftOperator& s, const Tolerances& tol = {});

}  // namespace treeshift
