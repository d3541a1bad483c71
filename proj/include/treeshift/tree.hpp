#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "treeshift/vertex.hpp"

namespace treeshift {

enum class TreeKind { Finite, Procedural };

/// Which ray of a procedural family a vertex sits on. Weight rules are
/// evaluated per branch.
enum class RayBranch { Finite, Spine, Primed, OffSpine };

/// Branching index Br(T): either a count or infinite. `exact` is false when
/// the value is a window-restricted partial sum.
struct BranchingCount {
  bool infinite = false;
  std::size_t value = 0;
  bool exact = true;

  static BranchingCount finite(std::size_t n, bool exact = true) { return {false, n, exact}; }
  static BranchingCount infinity() { return {true, 0, true}; }

  bool operator==(const BranchingCount&) const = default;
  std::string to_string() const;
};

/// Descendants of a vertex forming a single chain at levels
/// [first_level, last_level]; `last_level` empty means the chain is infinite.
struct RayInfo {
  RayBranch branch = RayBranch::Spine;
  std::int64_t first_level = 0;
  std::optional<std::int64_t> last_level;
};

/// A directed tree: connected, at most one parent per vertex, no circuit.
///
/// Finite trees are explicit; procedural families answer children/parent
/// queries from the vertex token. Instances are immutable and all queries are
/// pure. Every query taking a vertex throws `VertexNotFound` for vertices that
/// are not part of the tree.
class DirectedTree {
 public:
  virtual ~DirectedTree() = default;

  virtual TreeKind kind() const = 0;
  /// "finite" or one of the procedural family tags.
  virtual std::string family() const = 0;

  virtual bool contains(const VertexId& v) const = 0;
  virtual std::vector<VertexId> children(const VertexId& v) const = 0;
  virtual std::optional<VertexId> parent(const VertexId& v) const = 0;
  virtual std::optional<VertexId> root() const = 0;

  /// The vertex at level 0.
  virtual VertexId base() const = 0;
  virtual std::int64_t level(const VertexId& v) const = 0;

  /// Up to `cap` vertices on the given level, in a deterministic order.
  virtual std::vector<VertexId> level_vertices(std::int64_t level, std::size_t cap) const = 0;

  /// Exact Br(T) when the family determines it (always for finite trees).
  virtual std::optional<BranchingCount> symbolic_branching() const = 0;
  /// All branching vertices, when there are finitely many.
  virtual std::optional<std::vector<VertexId>> branching_vertices() const = 0;
  /// The full leaf set, when known symbolically (always for finite trees).
  virtual std::optional<std::vector<VertexId>> symbolic_leaves() const = 0;

  virtual RayBranch branch_of(const VertexId& v) const = 0;
  /// Set when Des(v) minus v is a single chain governed by one ray rule.
  virtual std::optional<RayInfo> ray_below(const VertexId& v) const = 0;
  /// True when the spine extends upward forever (rootless spine families).
  virtual bool spine_unbounded_above() const = 0;
  /// Gen(u) when it is finite and known.
  virtual std::optional<std::vector<VertexId>> full_generation(const VertexId& v) const = 0;
  /// A level whose generation has no children, if any.
  virtual std::optional<std::int64_t> last_level() const = 0;

  bool is_rooted() const { return root().has_value(); }
  bool is_leaf(const VertexId& v) const { return children(v).empty(); }
};

using TreePtr = std::shared_ptr<const DirectedTree>;

// ---------------------------------------------------------------------------
// Finite trees

class FiniteTree final : public DirectedTree {
 public:
  TreeKind kind() const override { return TreeKind::Finite; }
  std::string family() const override { return "finite"; }

  bool contains(const VertexId& v) const override;
  std::vector<VertexId> children(const VertexId& v) const override;
  std::optional<VertexId> parent(const VertexId& v) const override;
  std::optional<VertexId> root() const override { return root_; }
  VertexId base() const override { return root_; }
  std::int64_t level(const VertexId& v) const override;
  std::vector<VertexId> level_vertices(std::int64_t level, std::size_t cap) const override;
  std::optional<BranchingCount> symbolic_branching() const override;
  std::optional<std::vector<VertexId>> branching_vertices() const override;
  std::optional<std::vector<VertexId>> symbolic_leaves() const override;
  RayBranch branch_of(const VertexId&) const override { return RayBranch::Finite; }
  std::optional<RayInfo> ray_below(const VertexId&) const override { return std::nullopt; }
  bool spine_unbounded_above() const override { return false; }
  std::optional<std::vector<VertexId>> full_generation(const VertexId& v) const override;
  std::optional<std::int64_t> last_level() const override { return height_; }

  const std::vector<VertexId>& vertices() const { return vertices_; }
  std::int64_t height() const { return height_; }

 private:
  friend std::shared_ptr<const FiniteTree> validate_finite(
      const std::vector<VertexId>&, const std::vector<std::pair<VertexId, VertexId>>&,
      const std::optional<VertexId>&);
  FiniteTree() = default;

  struct Node {
    std::optional<VertexId> parent;
    std::vector<VertexId> children;
    std::int64_t level = 0;
  };
  const Node& node(const VertexId& v) const;

  std::vector<VertexId> vertices_;
  std::unordered_map<VertexId, Node, VertexIdHash> nodes_;
  std::map<std::int64_t, std::vector<VertexId>> by_level_;
  VertexId root_;
  std::int64_t height_ = 0;
};

/// Checks connectedness, unique parents and absence of circuits.
/// Errors: InvalidSpec, MultipleParents, CircuitFound, DisconnectedGraph,
/// RootMismatch.
std::shared_ptr<const FiniteTree> validate_finite(
    const std::vector<VertexId>& vertices,
    const std::vector<std::pair<VertexId, VertexId>>& edges,
    const std::optional<VertexId>& declared_root = std::nullopt);

// ---------------------------------------------------------------------------
// Procedural families

/// Integer spine with an optional primed ray hanging off vertex 0.
///
/// Covers the rooted and bilateral paths, the tilde tree and the comb trees
/// with one or two leaves. Spine vertices are integers n with
/// spine_min <= n <= spine_max; primed vertices are k' for
/// 1 <= k <= primed_max, with edges (0,1') and (k',(k+1)').
class SpineTree final : public DirectedTree {
 public:
  struct Shape {
    std::string family;
    std::optional<std::int64_t> spine_min;
    std::optional<std::int64_t> spine_max;
    bool has_primed = false;
    std::optional<std::int64_t> primed_max;
  };

  explicit SpineTree(Shape shape);

  TreeKind kind() const override { return TreeKind::Procedural; }
  std::string family() const override { return shape_.family; }
  bool contains(const VertexId& v) const override;
  std::vector<VertexId> children(const VertexId& v) const override;
  std::optional<VertexId> parent(const VertexId& v) const override;
  std::optional<VertexId> root() const override;
  VertexId base() const override { return VertexId::integer(0); }
  std::int64_t level(const VertexId& v) const override;
  std::vector<VertexId> level_vertices(std::int64_t level, std::size_t cap) const override;
  std::optional<BranchingCount> symbolic_branching() const override;
  std::optional<std::vector<VertexId>> branching_vertices() const override;
  std::optional<std::vector<VertexId>> symbolic_leaves() const override;
  RayBranch branch_of(const VertexId& v) const override;
  std::optional<RayInfo> ray_below(const VertexId& v) const override;
  bool spine_unbounded_above() const override { return !shape_.spine_min.has_value(); }
  std::optional<std::vector<VertexId>> full_generation(const VertexId& v) const override;
  std::optional<std::int64_t> last_level() const override;

  const Shape& shape() const { return shape_; }
  bool branches() const;

 private:
  struct Parsed {
    bool primed = false;
    std::int64_t index = 0;
  };
  std::optional<Parsed> parse(const VertexId& v) const;
  Parsed require(const VertexId& v) const;
  bool spine_has(std::int64_t n) const;
  bool primed_has(std::int64_t k) const;

  Shape shape_;
};

/// Rootless binary tree: every vertex has exactly two children. Spine
/// vertices `l` satisfy Par(l) = l-1; the second child of spine vertex `l` is
/// `l:1`, and an off-spine vertex `l:b` has children `l:b0` and `l:b1`.
class BinaryTree final : public DirectedTree {
 public:
  TreeKind kind() const override { return TreeKind::Procedural; }
  std::string family() const override { return "rootless-binary"; }
  bool contains(const VertexId& v) const override;
  std::vector<VertexId> children(const VertexId& v) const override;
  std::optional<VertexId> parent(const VertexId& v) const override;
  std::optional<VertexId> root() const override { return std::nullopt; }
  VertexId base() const override { return VertexId::integer(0); }
  std::int64_t level(const VertexId& v) const override;
  std::vector<VertexId> level_vertices(std::int64_t level, std::size_t cap) const override;
  std::optional<BranchingCount> symbolic_branching() const override {
    return BranchingCount::infinity();
  }
  std::optional<std::vector<VertexId>> branching_vertices() const override { return std::nullopt; }
  std::optional<std::vector<VertexId>> symbolic_leaves() const override {
    return std::vector<VertexId>{};
  }
  RayBranch branch_of(const VertexId& v) const override;
  std::optional<RayInfo> ray_below(const VertexId&) const override { return std::nullopt; }
  bool spine_unbounded_above() const override { return true; }
  std::optional<std::vector<VertexId>> full_generation(const VertexId&) const override {
    return std::nullopt;
  }
  std::optional<std::int64_t> last_level() const override { return std::nullopt; }

  /// True for `l:b` where b has length 1, i.e. the non-spine child of a spine
  /// vertex.
  bool is_spine_sibling(const VertexId& v) const;

 private:
  struct Parsed {
    std::int64_t spine = 0;
    std::string bits;
  };
  std::optional<Parsed> parse(const VertexId& v) const;
  Parsed require(const VertexId& v) const;
};

TreePtr make_rooted_path(std::optional<std::int64_t> length = std::nullopt);
TreePtr make_bilateral_path(std::optional<std::int64_t> leaf = std::nullopt);
TreePtr make_rootless_binary();
TreePtr make_tilde(bool rooted = false);
/// Rootless Br=1 tree: primed ray ending at leaf k0' (if given), integer ray
/// ending at leaf j0 >= k0 (if given). Neither given gives the tilde tree.
TreePtr make_comb(std::optional<std::int64_t> primed_leaf, std::optional<std::int64_t> unprimed_leaf);

// ---------------------------------------------------------------------------
// Generic traversal

/// n-fold children image; chi_n(W, 0) = W.
VertexSet chi_n(const DirectedTree& tree, const VertexSet& w, std::size_t n);

/// Union over j <= n of Chi^j(Par^j(u)), skipping nonexistent Par^j(u).
VertexSet gen_n(const DirectedTree& tree, const VertexId& u, std::size_t n);

/// Par^n(u) if it exists.
std::optional<VertexId> par_n(const DirectedTree& tree, const VertexId& u, std::size_t n);

std::int64_t level_index(const DirectedTree& tree, const VertexId& u);

}  // namespace treeshift
