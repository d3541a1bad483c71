#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "treeshift/sparse_vector.hpp"
#include "treeshift/tree.hpp"
#include "treeshift/weights.hpp"
#include "treeshift/window.hpp"

namespace treeshift {

/// Tolerance used for "norm <= 1" and for snapping isometric weights.
inline constexpr double kContractionSlack = 1e-12;
inline constexpr std::size_t kDenseCap = 4096;

struct NormValue {
  double value = 0.0;
  bool exact = true;
};

/// Weighted shift e_u -> sum_{v in Chi(u)} lambda_v e_v on a directed tree.
/// Weights are strictly positive and bounded; this is checked on
/// construction (on the standard window for procedural maps).
class ShiftOperator {
 public:
  ShiftOperator(TreePtr tree, WeightAssignment weights);

  const DirectedTree& tree() const { return *tree_; }
  const TreePtr& tree_ptr() const { return tree_; }
  const WeightAssignment& weights() const { return weights_; }

  /// lambda_v; throws VertexNotFound for vertices outside the tree and for
  /// the root.
  double weight(const VertexId& v) const;
  std::vector<std::pair<VertexId, double>> weighted_children(const VertexId& u) const;

  /// Sum of log(lambda) along the chain described by `ray`; -inf when the
  /// product tends to 0.
  double ray_log_sum(const RayInfo& ray) const;
  /// Sum over j >= 0 of log(lambda_{Par^j v}) while Par^j v is not the root.
  double ancestral_log_sum(const VertexId& v) const;
  /// Same, restricted to the first `depth` factors.
  double ancestral_log_sum(const VertexId& v, std::size_t depth) const;

  /// Every vertex below v has `first` children, each of weight `second`.
  std::optional<std::pair<std::size_t, double>> uniform_below(const VertexId& v) const;
  /// True when the family makes S an isometry (sum of squared child weights
  /// is 1 at every vertex).
  bool is_isometry() const;

  /// Operator norm; symbolic for the built-in families, otherwise the
  /// supremum over `window` (or the standard window) with exact = false.
  NormValue norm(const TreeWindow* window = nullptr) const;
  bool is_contraction(const TreeWindow* window = nullptr) const;
  /// Throws NotAContraction carrying the computed norm.
  void require_contraction(const TreeWindow* window = nullptr) const;

 private:
  std::optional<VertexId> vertex_on_ray(RayBranch branch, std::int64_t level) const;
  const RayRule& rule_for(RayBranch branch) const;
  void validate();

  TreePtr tree_;
  WeightAssignment weights_;
  std::map<RayBranch, std::int64_t> map_max_level_;
  std::map<RayBranch, std::int64_t> map_min_level_;
};

SparseVector apply(const ShiftOperator& s, const SparseVector& x);
SparseVector apply_adjoint(const ShiftOperator& s, const SparseVector& x);
/// S^n e_u from the closed product formula.
SparseVector power_closed(const ShiftOperator& s, const VertexId& u, std::size_t n);
/// S*^n e_u from the closed product formula.
SparseVector adjoint_power_closed(const ShiftOperator& s, const VertexId& u, std::size_t n);
NormValue operator_norm(const ShiftOperator& s, const TreeWindow& window);

/// Matrix of P_W S P_W in the window basis order.
Eigen::MatrixXd dense_truncation(const ShiftOperator& s, const TreeWindow& window,
                                 std::size_t cap = kDenseCap);
Eigen::VectorXd to_dense(const SparseVector& x, const TreeWindow& window);
SparseVector from_dense(const Eigen::VectorXd& x, const TreeWindow& window);

}  // namespace treeshift
