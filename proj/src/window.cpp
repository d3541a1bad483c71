#include "treeshift/window.hpp"

#include <algorithm>

#include "treeshift/error.hpp"

namespace treeshift {

TreeWindow::TreeWindow(TreePtr tree, std::int64_t min_level, std::int64_t max_level, std::size_t breadth)
    : tree_(std::move(tree)), min_level_(min_level), max_level_(max_level), breadth_(breadth) {
  if (!tree_) throw Error(ErrorCode::InvalidSpec, "window needs a tree");
  if (max_level_ < min_level_) throw Error(ErrorCode::InvalidSpec, "window level range is empty");
  if (breadth_ == 0) throw Error(ErrorCode::InvalidSpec, "window breadth must be positive");

  if (tree_->root()) min_level_ = std::max(min_level_, tree_->level(*tree_->root()));

  std::vector<VertexId> layer = tree_->level_vertices(min_level_, breadth_);
  std::sort(layer.begin(), layer.end());
  for (std::int64_t lvl = min_level_; lvl <= max_level_ && !layer.empty(); ++lvl) {
    for (const auto& v : layer) {
      index_.emplace(v, vertices_.size());
      vertices_.push_back(v);
    }
    std::vector<VertexId> next;
    for (const auto& v : layer) {
      for (auto& c : tree_->children(v)) {
        if (lvl == max_level_ || next.size() >= breadth_) {
          truncated_ = true;
          continue;
        }
        next.push_back(std::move(c));
      }
    }
    std::sort(next.begin(), next.end());
    layer = std::move(next);
  }
  if (vertices_.empty()) throw Error(ErrorCode::InvalidSpec, "window contains no vertices");
}

TreeWindow TreeWindow::standard(TreePtr tree, std::size_t breadth) {
  if (tree->kind() == TreeKind::Finite) {
    auto depth = *tree->last_level();
    return TreeWindow(std::move(tree), 0, depth, std::max<std::size_t>(breadth, 1u << 20));
  }
  return TreeWindow(std::move(tree), -4, 4, breadth);
}

std::size_t TreeWindow::index_of(const VertexId& v) const {
  auto it = index_.find(v);
  if (it == index_.end()) throw Error(ErrorCode::UnknownVertex, "vertex '" + v.str() + "' is outside the window");
  return it->second;
}

std::vector<VertexId> TreeWindow::level_members(std::int64_t level) const {
  std::vector<VertexId> out;
  for (const auto& v : vertices_)
    if (tree_->level(v) == level) out.push_back(v);
  return out;
}

bool TreeWindow::is_interior(const VertexId& v) const {
  if (!contains(v)) return false;
  for (const auto& c : tree_->children(v))
    if (!contains(c)) return false;
  auto p = tree_->parent(v);
  return !p || contains(*p);
}

std::vector<VertexId> TreeWindow::interior() const {
  std::vector<VertexId> out;
  for (const auto& v : vertices_)
    if (is_interior(v)) out.push_back(v);
  return out;
}

BranchingCount branching_index(const DirectedTree& tree, const TreeWindow& window) {
  if (auto sym = tree.symbolic_branching()) return *sym;
  std::size_t partial = 0;
  for (const auto& v : window.vertices()) {
    auto kids = tree.children(v);
    std::size_t inside = std::count_if(kids.begin(), kids.end(), [&](const VertexId& c) { return window.contains(c); });
    if (inside > 1) partial += inside - 1;
  }
  return BranchingCount::finite(partial, false);
}

VertexSet leaves(const DirectedTree& tree, const TreeWindow& window) {
  if (auto sym = tree.symbolic_leaves()) return VertexSet(sym->begin(), sym->end());
  VertexSet out;
  for (const auto& v : window.vertices())
    if (tree.is_leaf(v)) out.insert(v);
  return out;
}

}  // namespace treeshift
