#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "treeshift/tree.hpp"

namespace treeshift {

/// Finite, parent-closed piece of a tree between two levels.
///
/// Built from the vertices at `min_level` (at most `breadth` of them) by
/// repeatedly taking children, keeping at most `breadth` vertices per level.
/// Vertices are ordered level-major, then by token.
class TreeWindow {
 public:
  TreeWindow(TreePtr tree, std::int64_t min_level, std::int64_t max_level, std::size_t breadth = 64);

  /// Whole tree for finite models, levels [-4, 4] otherwise.
  static TreeWindow standard(TreePtr tree, std::size_t breadth = 64);

  const DirectedTree& tree() const { return *tree_; }
  const TreePtr& tree_ptr() const { return tree_; }
  std::int64_t min_level() const { return min_level_; }
  std::int64_t max_level() const { return max_level_; }
  std::size_t breadth() const { return breadth_; }

  const std::vector<VertexId>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  bool contains(const VertexId& v) const { return index_.count(v) != 0; }
  /// Position in the basis order; throws UnknownVertex when absent.
  std::size_t index_of(const VertexId& v) const;
  std::vector<VertexId> level_members(std::int64_t level) const;

  /// All children present in the window and the parent absent or present.
  bool is_interior(const VertexId& v) const;
  std::vector<VertexId> interior() const;
  /// True when some child of a window vertex was dropped by the breadth cap
  /// or lies below max_level.
  bool truncated() const { return truncated_; }

 private:
  TreePtr tree_;
  std::int64_t min_level_;
  std::int64_t max_level_;
  std::size_t breadth_;
  std::vector<VertexId> vertices_;
  std::unordered_map<VertexId, std::size_t, VertexIdHash> index_;
  bool truncated_ = false;
};

/// Br restricted to the window: sum over window vertices of (|Chi(u)|-1)
/// where all children are in the window. Symbolic when the family knows it.
BranchingCount branching_index(const DirectedTree& tree, const TreeWindow& window);

/// Leaves of the tree; symbolic for every built-in family, otherwise the
/// leaves found in the window.
VertexSet leaves(const DirectedTree& tree, const TreeWindow& window);

}  // namespace treeshift
