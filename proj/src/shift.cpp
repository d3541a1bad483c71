#include "treeshift/shift.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "treeshift/error.hpp"

namespace treeshift {

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

void require_positive(const RayRule& r, const char* what) {
  switch (r.kind) {
    case RayRule::Kind::Constant:
      if (!positive_finite(r.value)) throw Error(ErrorCode::InvalidSpec, std::string(what) + ": weights must be positive");
      break;
    case RayRule::Kind::Geometric:
      if (!positive_finite(r.below) || !std::isfinite(r.scale) || !(r.ratio > 0.0) || !std::isfinite(r.ratio))
        throw Error(ErrorCode::InvalidSpec, std::string(what) + ": invalid geometric parameters");
      break;
    case RayRule::Kind::ExpRay:
      if (!std::isfinite(r.scale) || !std::isfinite(r.power))
        throw Error(ErrorCode::InvalidSpec, std::string(what) + ": invalid exp-ray parameters");
      break;
  }
}

// Whether every value of the rule is strictly below 1 on the whole integer line.
bool strictly_below_one(const RayRule& r) {
  switch (r.kind) {
    case RayRule::Kind::Constant: return r.value < 1.0;
    case RayRule::Kind::Geometric: return r.scale > 0.0 && r.below < 1.0;
    case RayRule::Kind::ExpRay: return r.scale > 0.0;
  }
  return false;
}

}  // namespace

ShiftOperator::ShiftOperator(TreePtr tree, WeightAssignment weights)
    : tree_(std::move(tree)), weights_(std::move(weights)) {
  if (!tree_) throw Error(ErrorCode::InvalidSpec, "shift operator needs a tree");
  validate();
}

void ShiftOperator::validate() {
  const auto root = tree_->root();
  switch (weights_.kind) {
    case WeightAssignment::Kind::Map: {
      if (weights_.fallback && !positive_finite(*weights_.fallback))
        throw Error(ErrorCode::InvalidSpec, "default weight must be positive");
      for (const auto& [v, w] : weights_.values) {
        if (!tree_->contains(v)) throw Error(ErrorCode::UnknownVertex, "weight given for unknown vertex '" + v.str() + "'");
        if (root && v == *root) throw Error(ErrorCode::InvalidSpec, "the root carries no weight");
        if (!positive_finite(w)) throw Error(ErrorCode::InvalidSpec, "weight of '" + v.str() + "' must be positive, got " + fmt(w));
        const auto branch = tree_->branch_of(v);
        const auto lvl = tree_->level(v);
        auto [hi, new_hi] = map_max_level_.emplace(branch, lvl);
        if (!new_hi) hi->second = std::max(hi->second, lvl);
        auto [lo, new_lo] = map_min_level_.emplace(branch, lvl);
        if (!new_lo) lo->second = std::min(lo->second, lvl);
      }
      if (tree_->kind() == TreeKind::Finite) {
        const auto& finite = static_cast<const FiniteTree&>(*tree_);
        for (const auto& v : finite.vertices()) {
          if (v == *root || weights_.fallback || weights_.values.count(v)) continue;
          throw Error(ErrorCode::InvalidSpec, "missing weight for vertex '" + v.str() + "'");
        }
      } else if (!weights_.fallback) {
        throw Error(ErrorCode::InvalidSpec, "a weight map on a procedural tree needs a \"default\"");
      }
      break;
    }
    case WeightAssignment::Kind::Constant:
      require_positive(weights_.rule, "constant");
      break;
    case WeightAssignment::Kind::Family: {
      require_positive(weights_.rule, "family");
      if (weights_.primed) require_positive(*weights_.primed, "primed");
      if (!positive_finite(weights_.off)) throw Error(ErrorCode::InvalidSpec, "off-spine weight must be positive");
      if (dynamic_cast<const BinaryTree*>(tree_.get())) {
        if (weights_.sibling) {
          if (!positive_finite(*weights_.sibling)) throw Error(ErrorCode::InvalidSpec, "sibling weight must be positive");
        } else if (!strictly_below_one(weights_.rule)) {
          throw Error(ErrorCode::InvalidSpec, "complementary sibling weights need spine weights below 1");
        }
      }
      break;
    }
  }
}

const RayRule& ShiftOperator::rule_for(RayBranch branch) const {
  return branch == RayBranch::Primed ? weights_.primed_rule() : weights_.rule;
}

double ShiftOperator::weight(const VertexId& v) const {
  if (!tree_->contains(v)) throw Error(ErrorCode::VertexNotFound, "vertex '" + v.str() + "'");
  if (!tree_->parent(v)) throw Error(ErrorCode::VertexNotFound, "the root '" + v.str() + "' has no weight");
  switch (weights_.kind) {
    case WeightAssignment::Kind::Map: {
      auto it = weights_.values.find(v);
      if (it != weights_.values.end()) return it->second;
      return *weights_.fallback;
    }
    case WeightAssignment::Kind::Constant:
      return weights_.rule.value;
    case WeightAssignment::Kind::Family: {
      const auto branch = tree_->branch_of(v);
      const auto lvl = tree_->level(v);
      if (branch != RayBranch::OffSpine) return rule_for(branch).at(lvl);
      const auto& bin = static_cast<const BinaryTree&>(*tree_);
      if (!bin.is_spine_sibling(v)) return weights_.off;
      if (weights_.sibling) return *weights_.sibling;
      const double spine = weights_.rule.at(lvl);
      return std::sqrt(1.0 - spine * spine);
    }
  }
  return 0.0;
}

std::vector<std::pair<VertexId, double>> ShiftOperator::weighted_children(const VertexId& u) const {
  std::vector<std::pair<VertexId, double>> out;
  for (auto& c : tree_->children(u)) {
    double w = weight(c);
    out.emplace_back(std::move(c), w);
  }
  return out;
}

std::optional<VertexId> ShiftOperator::vertex_on_ray(RayBranch branch, std::int64_t level) const {
  VertexId v = branch == RayBranch::Primed ? VertexId::primed(level) : VertexId::integer(level);
  if (!tree_->contains(v)) return std::nullopt;
  return v;
}

double ShiftOperator::ray_log_sum(const RayInfo& ray) const {
  if (ray.last_level && *ray.last_level < ray.first_level) return 0.0;
  if (weights_.kind != WeightAssignment::Kind::Map) return rule_for(ray.branch).log_sum(ray.first_level, ray.last_level);

  double sum = 0.0;
  std::int64_t next = ray.first_level;
  if (auto it = map_max_level_.find(ray.branch); it != map_max_level_.end()) {
    std::int64_t stop = it->second;
    if (ray.last_level) stop = std::min(stop, *ray.last_level);
    for (; next <= stop; ++next) sum += std::log(weight(*vertex_on_ray(ray.branch, next)));
  }
  return sum + RayRule::constant(*weights_.fallback).log_sum(next, ray.last_level);
}

double ShiftOperator::ancestral_log_sum(const VertexId& v) const {
  double sum = 0.0;
  VertexId cur = v;
  while (auto p = tree_->parent(cur)) {
    if (tree_->spine_unbounded_above() && tree_->branch_of(cur) == RayBranch::Spine) {
      const auto lvl = tree_->level(cur);
      if (weights_.kind != WeightAssignment::Kind::Map) return sum + weights_.rule.log_sum(std::nullopt, lvl);
      auto lo = map_min_level_.find(RayBranch::Spine);
      if (lo == map_min_level_.end() || lvl < lo->second)
        return sum + RayRule::constant(*weights_.fallback).log_sum(std::nullopt, lvl);
    }
    sum += std::log(weight(cur));
    cur = *p;
  }
  return sum;
}

double ShiftOperator::ancestral_log_sum(const VertexId& v, std::size_t depth) const {
  double sum = 0.0;
  VertexId cur = v;
  for (std::size_t j = 0; j < depth; ++j) {
    auto p = tree_->parent(cur);
    if (!p) break;
    sum += std::log(weight(cur));
    cur = *p;
  }
  return sum;
}

std::optional<std::pair<std::size_t, double>> ShiftOperator::uniform_below(const VertexId& v) const {
  const bool binary = dynamic_cast<const BinaryTree*>(tree_.get()) != nullptr;
  switch (weights_.kind) {
    case WeightAssignment::Kind::Map:
      return std::nullopt;
    case WeightAssignment::Kind::Constant: {
      if (binary) return std::make_pair(std::size_t{2}, weights_.rule.value);
      auto ray = tree_->ray_below(v);
      if (ray && !ray->last_level && !tree_->is_leaf(v)) return std::make_pair(std::size_t{1}, weights_.rule.value);
      return std::nullopt;
    }
    case WeightAssignment::Kind::Family: {
      if (binary) {
        if (tree_->branch_of(v) == RayBranch::OffSpine) return std::make_pair(std::size_t{2}, weights_.off);
        return std::nullopt;
      }
      auto ray = tree_->ray_below(v);
      if (ray && !ray->last_level && !tree_->is_leaf(v) && rule_for(ray->branch).is_constant())
        return std::make_pair(std::size_t{1}, rule_for(ray->branch).value);
      return std::nullopt;
    }
  }
  return std::nullopt;
}

bool ShiftOperator::is_isometry() const {
  const bool binary = dynamic_cast<const BinaryTree*>(tree_.get()) != nullptr;
  const auto* spine = dynamic_cast<const SpineTree*>(tree_.get());
  switch (weights_.kind) {
    case WeightAssignment::Kind::Map:
      return false;
    case WeightAssignment::Kind::Constant: {
      const double c = weights_.rule.value;
      if (binary) return std::abs(2.0 * c * c - 1.0) <= kContractionSlack;
      if (spine && !spine->branches() && spine->symbolic_leaves()->empty())
        return std::abs(c * c - 1.0) <= kContractionSlack;
      return false;
    }
    case WeightAssignment::Kind::Family:
      if (binary) {
        const bool complement = !weights_.sibling;
        return complement && std::abs(2.0 * weights_.off * weights_.off - 1.0) <= kContractionSlack;
      }
      if (spine && !spine->branches() && spine->symbolic_leaves()->empty() && weights_.rule.is_constant())
        return std::abs(weights_.rule.value * weights_.rule.value - 1.0) <= kContractionSlack;
      return false;
  }
  return false;
}

NormValue ShiftOperator::norm(const TreeWindow* window) const {
  NormValue out;
  auto window_norm = [&](const TreeWindow& w) {
    double best = 0.0;
    for (const auto& u : w.vertices()) {
      double s = 0.0;
      for (const auto& [c, lam] : weighted_children(u)) s += lam * lam;
      best = std::max(best, std::sqrt(s));
    }
    return best;
  };

  const bool binary = dynamic_cast<const BinaryTree*>(tree_.get()) != nullptr;
  const auto* spine = dynamic_cast<const SpineTree*>(tree_.get());

  if (tree_->kind() == TreeKind::Finite) {
    out.value = window_norm(TreeWindow::standard(tree_));
  } else if (weights_.kind == WeightAssignment::Kind::Map) {
    out.exact = false;
    out.value = window ? window_norm(*window) : window_norm(TreeWindow::standard(tree_));
  } else if (weights_.kind == WeightAssignment::Kind::Constant) {
    const double c = weights_.rule.value;
    if (binary || (spine && spine->branches())) {
      out.value = std::sqrt(2.0) * c;
    } else {
      bool has_edge = !tree_->children(tree_->base()).empty() || tree_->parent(tree_->base()).has_value();
      out.value = has_edge ? c : 0.0;
    }
  } else if (binary) {
    const double spine_part =
        weights_.sibling ? std::hypot(weights_.rule.sup(std::nullopt, std::nullopt), *weights_.sibling) : 1.0;
    out.value = std::max(spine_part, std::sqrt(2.0) * weights_.off);
  } else if (spine) {
    const auto& shape = spine->shape();
    std::optional<std::int64_t> lo;
    if (shape.spine_min) lo = *shape.spine_min + 1;
    double best = weights_.rule.sup(lo, shape.spine_max);
    if (shape.has_primed) {
      best = std::max(best, weights_.primed_rule().sup(1, shape.primed_max));
      if (spine->branches()) best = std::max(best, std::hypot(weights_.rule.at(1), weights_.primed_rule().at(1)));
    }
    out.value = best;
  } else {
    out.exact = false;
    out.value = window ? window_norm(*window) : window_norm(TreeWindow::standard(tree_));
  }
  if (std::abs(out.value - 1.0) <= kContractionSlack) out.value = 1.0;
  return out;
}

bool ShiftOperator::is_contraction(const TreeWindow* window) const {
  return norm(window).value <= 1.0 + kContractionSlack;
}

void ShiftOperator::require_contraction(const TreeWindow* window) const {
  auto n = norm(window);
  if (n.value > 1.0 + kContractionSlack)
    throw Error(ErrorCode::NotAContraction, "operator norm " + fmt(n.value) + " exceeds 1");
}

// ---------------------------------------------------------------------------

SparseVector apply(const ShiftOperator& s, const SparseVector& x) {
  SparseVector out;
  for (const auto& [u, c] : x) {
    if (!s.tree().contains(u)) throw Error(ErrorCode::UnknownVertex, "vertex '" + u.str() + "'");
    for (const auto& [v, lam] : s.weighted_children(u)) out.add(v, c * lam);
  }
  return out;
}

SparseVector apply_adjoint(const ShiftOperator& s, const SparseVector& x) {
  SparseVector out;
  for (const auto& [u, c] : x) {
    if (!s.tree().contains(u)) throw Error(ErrorCode::UnknownVertex, "vertex '" + u.str() + "'");
    if (auto p = s.tree().parent(u)) out.add(*p, c * s.weight(u));
  }
  return out;
}

SparseVector power_closed(const ShiftOperator& s, const VertexId& u, std::size_t n) {
  if (!s.tree().contains(u)) throw Error(ErrorCode::UnknownVertex, "vertex '" + u.str() + "'");
  SparseVector out;
  for (const auto& v : chi_n(s.tree(), VertexSet{u}, n)) {
    double prod = 1.0;
    VertexId cur = v;
    for (std::size_t j = 0; j < n; ++j) {
      prod *= s.weight(cur);
      cur = *s.tree().parent(cur);
    }
    out.add(v, prod);
  }
  return out;
}

SparseVector adjoint_power_closed(const ShiftOperator& s, const VertexId& u, std::size_t n) {
  if (!s.tree().contains(u)) throw Error(ErrorCode::UnknownVertex, "vertex '" + u.str() + "'");
  double prod = 1.0;
  VertexId cur = u;
  for (std::size_t j = 0; j < n; ++j) {
    auto p = s.tree().parent(cur);
    if (!p) return {};
    prod *= s.weight(cur);
    cur = *p;
  }
  return SparseVector::basis(cur, prod);
}

NormValue operator_norm(const ShiftOperator& s, const TreeWindow& window) { return s.norm(&window); }

Eigen::MatrixXd dense_truncation(const ShiftOperator& s, const TreeWindow& window, std::size_t cap) {
  const std::size_t d = window.size();
  if (d > cap)
    throw Error(ErrorCode::WindowTooLarge, std::to_string(d) + " vertices exceed the cap of " + std::to_string(cap));
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t col = 0; col < d; ++col) {
    for (const auto& [v, lam] : s.weighted_children(window.vertices()[col])) {
      if (window.contains(v)) m(static_cast<Eigen::Index>(window.index_of(v)), static_cast<Eigen::Index>(col)) = lam;
    }
  }
  return m;
}

Eigen::VectorXd to_dense(const SparseVector& x, const TreeWindow& window) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(window.size()));
  for (const auto& [v, c] : x) out(static_cast<Eigen::Index>(window.index_of(v))) = c;
  return out;
}

SparseVector from_dense(const Eigen::VectorXd& x, const TreeWindow& window) {
  SparseVector out;
  for (Eigen::Index i = 0; i < x.size(); ++i) out.add(window.vertices()[static_cast<std::size_t>(i)], x(i));
  return out;
}

}  // namespace treeshift
