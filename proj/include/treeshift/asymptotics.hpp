#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "treeshift/shift.hpp"

namespace treeshift {

enum class Status { Converged, MaxDepthReached, ExactZero, ExactOne };
std::string_view status_name(Status s);

struct Tolerances {
  double tol = 1e-10;
  std::size_t max_depth = 64;
  double zero_threshold = 1e-9;
  double one_sided = 1e-6;
};

/// Limit estimate for one vertex (forward profile) or one level (adjoint
/// profile). For the forward profile `estimate` is an upper bound; for the
/// truncated adjoint sums it is a lower bound. `certified` marks values that
/// come from a closed form rather than a stopping rule.
struct ProfileEntry {
  VertexId vertex;
  std::int64_t level = 0;
  double estimate = 0.0;
  double upper = 0.0;
  Status status = Status::Converged;
  std::size_t depth = 0;
  bool certified = false;
  /// s_1, s_2, ... for numerically iterated entries.
  std::vector<double> partial_sums;
};

struct AsymptoticProfile {
  Tolerances tolerances;
  std::vector<ProfileEntry> entries;

  const ProfileEntry* find(const VertexId& v) const;
  const ProfileEntry& at(const VertexId& v) const;
};

/// alpha_u = lim_n sum_{v in Chi^n(u)} prod_{j<n} lambda_{Par^j v}^2.
/// Throws NotAContraction.
AsymptoticProfile alpha_profile(const ShiftOperator& s, const TreeWindow& window, const Tolerances& tol = {});
/// The same computation for a single vertex, which need not be in a window.
ProfileEntry alpha_entry(const ShiftOperator& s, const VertexId& u, const Tolerances& tol = {});
/// Partial sum s_n(u), evaluated with closed forms where available.
double alpha_partial_sum(const ShiftOperator& s, const VertexId& u, std::size_t n);

/// V' = {alpha > zero_threshold} restricted to the window, with Br(T').
struct StableSubtree {
  VertexSet members;
  BranchingCount branching;
  double zero_threshold = 1e-9;

  bool empty() const { return members.empty(); }
  bool contains(const VertexId& v) const { return members.count(v) != 0; }
};

/// Checks that V' is leafless, parent-closed and contains the root when the
/// tree is rooted (on the window); throws StructuralViolation otherwise.
/// Br(T') is reported as infinite once the window partial sum exceeds
/// `multiplicity_cap` on a tree with infinitely many branching vertices.
StableSubtree stable_subtree(const ShiftOperator& s, const TreeWindow& window, const AsymptoticProfile& profile,
                             double zero_threshold = 1e-9, std::size_t multiplicity_cap = 8);

/// h_u = sum_{v in Gen(u)} (prod_{j>=0} lambda_{Par^j v}) e_v, kept per level.
struct HVector {
  std::int64_t level = 0;
  SparseVector h;
  /// False when h only covers the part of Gen(u) inside the window.
  bool generation_complete = true;
};

struct AdjointProfile {
  bool rooted = false;
  Tolerances tolerances;
  /// One entry per window level; `vertex` is the level representative.
  std::vector<ProfileEntry> levels;
  std::vector<HVector> h;
  /// Number of vertices of each generation, empty when infinite.
  std::vector<std::optional<std::size_t>> generation_size;

  const ProfileEntry* find_level(std::int64_t level) const;
  const ProfileEntry& at_level(std::int64_t level) const;
  const HVector& h_at_level(std::int64_t level) const;
};

/// a_u = ||h_u||^2; rooted trees give a = 0 without numerics. Throws
/// NotAContraction.
AdjointProfile adjoint_profile(const ShiftOperator& s, const TreeWindow& window, const Tolerances& tol = {});
/// a_u for a single vertex.
ProfileEntry adjoint_entry(const ShiftOperator& s, const VertexId& u, const Tolerances& tol = {});

enum class ForwardClass { C0dot, C1dot, Mixed, Undetermined };
enum class AdjointClass { Cdot0, Cdot1, Mixed, Undetermined };
std::string_view class_name(ForwardClass c);
std::string_view class_name(AdjointClass c);

struct Classification {
  ForwardClass forward = ForwardClass::Undetermined;
  bool forward_certified = false;
  AdjointClass adjoint = AdjointClass::Undetermined;
  bool adjoint_certified = false;
  std::vector<std::string> notes;

  std::string summary() const;
};

Classification classify(const ShiftOperator& s, const AsymptoticProfile& forward, const AdjointProfile& adjoint,
                        const Tolerances& tol = {});

}  // namespace treeshift
