#include "treeshift/tree.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <unordered_set>

#include "treeshift/error.hpp"

namespace treeshift {

namespace {

std::optional<std::int64_t> parse_int(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  // Reject non-canonical renderings such as "+3", "007" or "-0".
  if (std::to_string(out) != s) return std::nullopt;
  return out;
}

[[noreturn]] void not_found(const VertexId& v) {
  throw Error(ErrorCode::VertexNotFound, "vertex '" + v.str() + "'");
}

}  // namespace

std::string BranchingCount::to_string() const {
  if (infinite) return "inf";
  return std::to_string(value);
}

// ---------------------------------------------------------------------------
// FiniteTree

std::shared_ptr<const FiniteTree> validate_finite(
    const std::vector<VertexId>& vertices,
    const std::vector<std::pair<VertexId, VertexId>>& edges,
    const std::optional<VertexId>& declared_root) {
  if (vertices.empty()) throw Error(ErrorCode::InvalidSpec, "vertex list is empty");

  std::shared_ptr<FiniteTree> tree(new FiniteTree());
  for (const auto& v : vertices) {
    if (v.empty()) throw Error(ErrorCode::InvalidSpec, "empty vertex name");
    if (!tree->nodes_.emplace(v, FiniteTree::Node{}).second)
      throw Error(ErrorCode::InvalidSpec, "duplicate vertex '" + v.str() + "'");
    tree->vertices_.push_back(v);
  }

  for (const auto& [from, to] : edges) {
    for (const auto* end : {&from, &to}) {
      if (!tree->nodes_.count(*end))
        throw Error(ErrorCode::InvalidSpec, "edge references unlisted vertex '" + end->str() + "'");
    }
  }

  for (const auto& [from, to] : edges) {
    if (from == to) throw Error(ErrorCode::CircuitFound, from.str() + " -> " + from.str());
    auto& child = tree->nodes_.at(to);
    if (child.parent) {
      if (*child.parent == from) throw Error(ErrorCode::InvalidSpec, "duplicate edge " + from.str() + " -> " + to.str());
      throw Error(ErrorCode::MultipleParents, to.str());
    }
    child.parent = from;
    tree->nodes_.at(from).children.push_back(to);
  }

  // Unique parents make the parent pointers a functional graph, so any circuit
  // is found by following them.
  std::unordered_map<VertexId, int, VertexIdHash> state;  // 1 = on current path, 2 = done
  for (const auto& start : vertices) {
    if (state[start] == 2) continue;
    std::vector<VertexId> path;
    std::optional<VertexId> cur = start;
    while (cur && state[*cur] == 0) {
      state[*cur] = 1;
      path.push_back(*cur);
      cur = tree->nodes_.at(*cur).parent;
    }
    if (cur && state[*cur] == 1) {
      std::string cycle = cur->str();
      auto it = std::find(path.begin(), path.end(), *cur);
      for (auto rit = path.rbegin(); rit != path.rend() && &*rit != &*it; ++rit) cycle += " -> " + rit->str();
      cycle += " -> " + cur->str();
      throw Error(ErrorCode::CircuitFound, cycle);
    }
    for (const auto& v : path) state[v] = 2;
  }

  std::vector<VertexId> roots;
  for (const auto& v : vertices)
    if (!tree->nodes_.at(v).parent) roots.push_back(v);
  if (roots.size() != 1) {
    throw Error(ErrorCode::DisconnectedGraph,
                std::to_string(roots.size()) + " components (parentless vertices)");
  }
  tree->root_ = roots.front();
  if (declared_root && *declared_root != tree->root_) {
    throw Error(ErrorCode::RootMismatch,
                "declared '" + declared_root->str() + "', inferred '" + tree->root_.str() + "'");
  }

  for (auto& [id, node] : tree->nodes_) std::sort(node.children.begin(), node.children.end());

  std::deque<VertexId> queue{tree->root_};
  while (!queue.empty()) {
    VertexId v = queue.front();
    queue.pop_front();
    const auto& node = tree->nodes_.at(v);
    tree->by_level_[node.level].push_back(v);
    tree->height_ = std::max(tree->height_, node.level);
    for (const auto& c : node.children) {
      tree->nodes_.at(c).level = node.level + 1;
      queue.push_back(c);
    }
  }
  for (auto& [lvl, list] : tree->by_level_) std::sort(list.begin(), list.end());
  return tree;
}

const FiniteTree::Node& FiniteTree::node(const VertexId& v) const {
  auto it = nodes_.find(v);
  if (it == nodes_.end()) not_found(v);
  return it->second;
}

bool FiniteTree::contains(const VertexId& v) const { return nodes_.count(v) != 0; }

std::vector<VertexId> FiniteTree::children(const VertexId& v) const { return node(v).children; }

std::optional<VertexId> FiniteTree::parent(const VertexId& v) const { return node(v).parent; }

std::int64_t FiniteTree::level(const VertexId& v) const { return node(v).level; }

std::vector<VertexId> FiniteTree::level_vertices(std::int64_t level, std::size_t cap) const {
  auto it = by_level_.find(level);
  if (it == by_level_.end()) return {};
  std::vector<VertexId> out = it->second;
  if (out.size() > cap) out.resize(cap);
  return out;
}

std::optional<BranchingCount> FiniteTree::symbolic_branching() const {
  std::size_t br = 0;
  for (const auto& [id, node] : nodes_)
    if (!node.children.empty()) br += node.children.size() - 1;
  return BranchingCount::finite(br);
}

std::optional<std::vector<VertexId>> FiniteTree::branching_vertices() const {
  std::vector<VertexId> out;
  for (const auto& v : vertices_)
    if (nodes_.at(v).children.size() > 1) out.push_back(v);
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<std::vector<VertexId>> FiniteTree::symbolic_leaves() const {
  std::vector<VertexId> out;
  for (const auto& v : vertices_)
    if (nodes_.at(v).children.empty()) out.push_back(v);
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<std::vector<VertexId>> FiniteTree::full_generation(const VertexId& v) const {
  // In a rooted tree Gen(u) is the whole level of u.
  return by_level_.at(level(v));
}

// ---------------------------------------------------------------------------
// SpineTree

SpineTree::SpineTree(Shape shape) : shape_(std::move(shape)) {
  if (shape_.spine_min && *shape_.spine_min > 0)
    throw Error(ErrorCode::InvalidSpec, "spine must contain vertex 0");
  if (shape_.spine_max && *shape_.spine_max < 0)
    throw Error(ErrorCode::InvalidSpec, "spine must contain vertex 0");
  if (shape_.primed_max && *shape_.primed_max < 1)
    throw Error(ErrorCode::InvalidSpec, "primed leaf must be at depth >= 1");
  if (shape_.primed_max && !shape_.has_primed)
    throw Error(ErrorCode::InvalidSpec, "primed leaf without primed ray");
}

bool SpineTree::spine_has(std::int64_t n) const {
  return (!shape_.spine_min || n >= *shape_.spine_min) && (!shape_.spine_max || n <= *shape_.spine_max);
}

bool SpineTree::primed_has(std::int64_t k) const {
  return shape_.has_primed && k >= 1 && (!shape_.primed_max || k <= *shape_.primed_max);
}

bool SpineTree::branches() const { return shape_.has_primed && spine_has(1); }

std::optional<SpineTree::Parsed> SpineTree::parse(const VertexId& v) const {
  std::string_view s = v.str();
  bool primed = !s.empty() && s.back() == '\'';
  if (primed) s.remove_suffix(1);
  auto n = parse_int(s);
  if (!n) return std::nullopt;
  if (primed ? !primed_has(*n) : !spine_has(*n)) return std::nullopt;
  return Parsed{primed, *n};
}

SpineTree::Parsed SpineTree::require(const VertexId& v) const {
  auto p = parse(v);
  if (!p) not_found(v);
  return *p;
}

bool SpineTree::contains(const VertexId& v) const { return parse(v).has_value(); }

std::vector<VertexId> SpineTree::children(const VertexId& v) const {
  auto p = require(v);
  std::vector<VertexId> out;
  if (p.primed) {
    if (primed_has(p.index + 1)) out.push_back(VertexId::primed(p.index + 1));
    return out;
  }
  if (spine_has(p.index + 1)) out.push_back(VertexId::integer(p.index + 1));
  if (p.index == 0 && primed_has(1)) out.push_back(VertexId::primed(1));
  return out;
}

std::optional<VertexId> SpineTree::parent(const VertexId& v) const {
  auto p = require(v);
  if (p.primed) return p.index == 1 ? VertexId::integer(0) : VertexId::primed(p.index - 1);
  if (!spine_has(p.index - 1)) return std::nullopt;
  return VertexId::integer(p.index - 1);
}

std::optional<VertexId> SpineTree::root() const {
  if (!shape_.spine_min) return std::nullopt;
  return VertexId::integer(*shape_.spine_min);
}

std::int64_t SpineTree::level(const VertexId& v) const { return require(v).index; }

std::vector<VertexId> SpineTree::level_vertices(std::int64_t level, std::size_t cap) const {
  std::vector<VertexId> out;
  if (spine_has(level)) out.push_back(VertexId::integer(level));
  if (primed_has(level)) out.push_back(VertexId::primed(level));
  if (out.size() > cap) out.resize(cap);
  return out;
}

std::optional<BranchingCount> SpineTree::symbolic_branching() const {
  return BranchingCount::finite(branches() ? 1 : 0);
}

std::optional<std::vector<VertexId>> SpineTree::branching_vertices() const {
  if (branches()) return std::vector<VertexId>{VertexId::integer(0)};
  return std::vector<VertexId>{};
}

std::optional<std::vector<VertexId>> SpineTree::symbolic_leaves() const {
  std::vector<VertexId> out;
  if (shape_.spine_max && !(*shape_.spine_max == 0 && primed_has(1)))
    out.push_back(VertexId::integer(*shape_.spine_max));
  if (shape_.has_primed && shape_.primed_max) out.push_back(VertexId::primed(*shape_.primed_max));
  std::sort(out.begin(), out.end());
  return out;
}

RayBranch SpineTree::branch_of(const VertexId& v) const {
  return require(v).primed ? RayBranch::Primed : RayBranch::Spine;
}

std::optional<RayInfo> SpineTree::ray_below(const VertexId& v) const {
  auto p = require(v);
  if (p.primed) return RayInfo{RayBranch::Primed, p.index + 1, shape_.primed_max};
  if (p.index < 0 && shape_.has_primed) return std::nullopt;
  if (p.index == 0 && primed_has(1)) {
    if (spine_has(1)) return std::nullopt;
    return RayInfo{RayBranch::Primed, 1, shape_.primed_max};
  }
  return RayInfo{RayBranch::Spine, p.index + 1, shape_.spine_max};
}

std::optional<std::vector<VertexId>> SpineTree::full_generation(const VertexId& v) const {
  auto p = require(v);
  std::vector<VertexId> out;
  if (spine_has(p.index)) out.push_back(VertexId::integer(p.index));
  if (primed_has(p.index)) out.push_back(VertexId::primed(p.index));
  return out;
}

std::optional<std::int64_t> SpineTree::last_level() const {
  if (!shape_.spine_max) return std::nullopt;
  if (shape_.has_primed && !shape_.primed_max) return std::nullopt;
  std::int64_t last = *shape_.spine_max;
  if (shape_.has_primed) last = std::max(last, *shape_.primed_max);
  return last;
}

// ---------------------------------------------------------------------------
// BinaryTree

std::optional<BinaryTree::Parsed> BinaryTree::parse(const VertexId& v) const {
  const std::string& s = v.str();
  auto colon = s.find(':');
  if (colon == std::string::npos) {
    auto n = parse_int(s);
    if (!n) return std::nullopt;
    return Parsed{*n, {}};
  }
  auto n = parse_int(std::string_view(s).substr(0, colon));
  std::string bits = s.substr(colon + 1);
  if (!n || bits.empty() || bits.front() != '1') return std::nullopt;
  if (bits.find_first_not_of("01") != std::string::npos) return std::nullopt;
  return Parsed{*n, bits};
}

BinaryTree::Parsed BinaryTree::require(const VertexId& v) const {
  auto p = parse(v);
  if (!p) not_found(v);
  return *p;
}

bool BinaryTree::contains(const VertexId& v) const { return parse(v).has_value(); }

std::vector<VertexId> BinaryTree::children(const VertexId& v) const {
  auto p = require(v);
  if (p.bits.empty()) {
    return {VertexId::integer(p.spine + 1), VertexId(std::to_string(p.spine) + ":1")};
  }
  return {VertexId(v.str() + "0"), VertexId(v.str() + "1")};
}

std::optional<VertexId> BinaryTree::parent(const VertexId& v) const {
  auto p = require(v);
  if (p.bits.empty()) return VertexId::integer(p.spine - 1);
  if (p.bits.size() == 1) return VertexId::integer(p.spine);
  return VertexId(v.str().substr(0, v.str().size() - 1));
}

std::int64_t BinaryTree::level(const VertexId& v) const {
  auto p = require(v);
  return p.spine + static_cast<std::int64_t>(p.bits.size());
}

std::vector<VertexId> BinaryTree::level_vertices(std::int64_t level, std::size_t cap) const {
  // Spine vertex first, then off-spine vertices ordered by how far above the
  // level they leave the spine.
  std::vector<VertexId> out;
  if (cap == 0) return out;
  out.push_back(VertexId::integer(level));
  for (std::size_t depth = 1; out.size() < cap && depth < 62; ++depth) {
    const std::string prefix = std::to_string(level - static_cast<std::int64_t>(depth)) + ":1";
    const std::uint64_t count = std::uint64_t{1} << (depth - 1);
    for (std::uint64_t tail = 0; tail < count && out.size() < cap; ++tail) {
      std::string bits;
      for (std::size_t b = depth - 1; b-- > 0;) bits.push_back(((tail >> b) & 1U) ? '1' : '0');
      out.emplace_back(prefix + bits);
    }
  }
  return out;
}

RayBranch BinaryTree::branch_of(const VertexId& v) const {
  return require(v).bits.empty() ? RayBranch::Spine : RayBranch::OffSpine;
}

bool BinaryTree::is_spine_sibling(const VertexId& v) const { return require(v).bits.size() == 1; }

// ---------------------------------------------------------------------------
// Factories

TreePtr make_rooted_path(std::optional<std::int64_t> length) {
  if (length && *length < 0) throw Error(ErrorCode::InvalidSpec, "path length must be >= 0");
  return std::make_shared<SpineTree>(SpineTree::Shape{"rooted-path", 0, length, false, std::nullopt});
}

TreePtr make_bilateral_path(std::optional<std::int64_t> leaf) {
  return std::make_shared<SpineTree>(
      SpineTree::Shape{"bilateral-path", std::nullopt, leaf, false, std::nullopt});
}

TreePtr make_rootless_binary() { return std::make_shared<BinaryTree>(); }

TreePtr make_tilde(bool rooted) {
  std::optional<std::int64_t> spine_min;
  if (rooted) spine_min = 0;
  return std::make_shared<SpineTree>(SpineTree::Shape{"tilde", spine_min, std::nullopt, true, std::nullopt});
}

TreePtr make_comb(std::optional<std::int64_t> primed_leaf, std::optional<std::int64_t> unprimed_leaf) {
  if (primed_leaf && *primed_leaf < 1) throw Error(ErrorCode::InvalidSpec, "primed_leaf must be >= 1");
  if (unprimed_leaf && *unprimed_leaf < 1) throw Error(ErrorCode::InvalidSpec, "unprimed_leaf must be >= 1");
  if (primed_leaf && unprimed_leaf && *unprimed_leaf < *primed_leaf)
    throw Error(ErrorCode::InvalidSpec, "unprimed_leaf must be >= primed_leaf");
  return std::make_shared<SpineTree>(
      SpineTree::Shape{"comb", std::nullopt, unprimed_leaf, true, primed_leaf});
}

// ---------------------------------------------------------------------------
// Traversal

VertexSet chi_n(const DirectedTree& tree, const VertexSet& w, std::size_t n) {
  VertexSet cur = w;
  for (std::size_t i = 0; i < n && !cur.empty(); ++i) {
    VertexSet next;
    for (const auto& v : cur)
      for (auto& c : tree.children(v)) next.insert(std::move(c));
    cur = std::move(next);
  }
  return cur;
}

std::optional<VertexId> par_n(const DirectedTree& tree, const VertexId& u, std::size_t n) {
  std::optional<VertexId> cur = u;
  if (!tree.contains(u)) not_found(u);
  for (std::size_t i = 0; i < n && cur; ++i) cur = tree.parent(*cur);
  return cur;
}

VertexSet gen_n(const DirectedTree& tree, const VertexId& u, std::size_t n) {
  VertexSet out{u};
  std::optional<VertexId> anc = u;
  for (std::size_t j = 1; j <= n; ++j) {
    anc = tree.parent(*anc);
    if (!anc) break;
    auto layer = chi_n(tree, VertexSet{*anc}, j);
    out.insert(layer.begin(), layer.end());
  }
  return out;
}

std::int64_t level_index(const DirectedTree& tree, const VertexId& u) { return tree.level(u); }

}  // namespace treeshift
