#include "treeshift/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "treeshift/error.hpp"

namespace treeshift {

namespace {

struct BudgetExhausted {};

struct ClosedValue {
  double value = 0.0;
  Status status = Status::Converged;
};

// Evaluates s_n(u) and closed-form limits, memoized for one query batch.
class AlphaEngine {
 public:
  explicit AlphaEngine(const ShiftOperator& s) : s_(s), tree_(s.tree()), isometry_(s.is_isometry()) {}

  double partial(const VertexId& u, std::size_t n) {
    if (n == 0) return 1.0;
    if (tree_.is_leaf(u)) return 0.0;
    if (isometry_) return 1.0;
    if (auto ray = tree_.ray_below(u)) {
      const std::int64_t last = ray->first_level + static_cast<std::int64_t>(n) - 1;
      if (ray->last_level && *ray->last_level < last) return 0.0;
      return std::exp(2.0 * s_.ray_log_sum(RayInfo{ray->branch, ray->first_level, last}));
    }
    if (auto uni = s_.uniform_below(u)) {
      return std::pow(static_cast<double>(uni->first) * uni->second * uni->second, static_cast<double>(n));
    }
    auto key = std::make_pair(u, n);
    if (auto it = partial_memo_.find(key); it != partial_memo_.end()) return it->second;
    if (budget_ == 0) throw BudgetExhausted{};
    --budget_;
    double sum = 0.0;
    for (const auto& [c, lam] : s_.weighted_children(u)) sum += lam * lam * partial(c, n - 1);
    partial_memo_.emplace(key, sum);
    return sum;
  }

  std::optional<ClosedValue> closed(const VertexId& u, std::size_t depth_left) {
    if (tree_.is_leaf(u) || tree_.kind() == TreeKind::Finite) return ClosedValue{0.0, Status::ExactZero};
    if (isometry_) return ClosedValue{1.0, Status::ExactOne};
    if (auto ray = tree_.ray_below(u)) {
      if (ray->last_level) return ClosedValue{0.0, Status::ExactZero};
      const double l = s_.ray_log_sum(*ray);
      if (l == -INFINITY) return ClosedValue{0.0, Status::ExactZero};
      if (l == 0.0) return ClosedValue{1.0, Status::ExactOne};
      return ClosedValue{std::exp(2.0 * l), Status::Converged};
    }
    if (auto uni = s_.uniform_below(u)) {
      const double q = static_cast<double>(uni->first) * uni->second * uni->second;
      if (std::abs(q - 1.0) <= kContractionSlack) return ClosedValue{1.0, Status::ExactOne};
      if (q < 1.0) return ClosedValue{0.0, Status::ExactZero};
      return std::nullopt;
    }
    if (depth_left == 0) return std::nullopt;
    if (auto it = closed_memo_.find(u); it != closed_memo_.end()) return it->second;

    double sum = 0.0;
    double weight_sq = 0.0;
    bool all_zero = true;
    bool all_one = true;
    for (const auto& [c, lam] : s_.weighted_children(u)) {
      auto child = closed(c, depth_left - 1);
      if (!child) {
        closed_memo_.emplace(u, std::nullopt);
        return std::nullopt;
      }
      sum += lam * lam * child->value;
      weight_sq += lam * lam;
      all_zero = all_zero && child->status == Status::ExactZero;
      all_one = all_one && child->status == Status::ExactOne;
    }
    ClosedValue out{sum, Status::Converged};
    if (all_zero) out = {0.0, Status::ExactZero};
    if (all_one && std::abs(weight_sq - 1.0) <= kContractionSlack) out = {1.0, Status::ExactOne};
    closed_memo_.emplace(u, out);
    return out;
  }

  ProfileEntry forward(const VertexId& u, const Tolerances& tol) {
    ProfileEntry e;
    e.vertex = u;
    e.level = tree_.level(u);
    if (auto c = closed(u, tol.max_depth)) {
      e.estimate = e.upper = std::clamp(c->value, 0.0, 1.0);
      e.status = c->status;
      e.certified = true;
      return e;
    }
    double prev = 1.0;
    int streak = 0;
    e.status = Status::MaxDepthReached;
    for (std::size_t n = 1; n <= tol.max_depth; ++n) {
      double cur = 0.0;
      try {
        cur = partial(u, n);
      } catch (const BudgetExhausted&) {
        break;
      }
      e.partial_sums.push_back(cur);
      e.depth = n;
      streak = std::abs(prev - cur) < tol.tol ? streak + 1 : 0;
      prev = cur;
      if (streak >= 3) {
        e.status = Status::Converged;
        break;
      }
    }
    e.estimate = e.upper = std::clamp(prev, 0.0, 1.0);
    return e;
  }

 private:
  const ShiftOperator& s_;
  const DirectedTree& tree_;
  bool isometry_;
  std::size_t budget_ = 2'000'000;
  std::map<std::pair<VertexId, std::size_t>, double> partial_memo_;
  std::map<VertexId, std::optional<ClosedValue>> closed_memo_;
};

struct AdjointLevel {
  ProfileEntry entry;
  HVector h;
  std::optional<std::size_t> generation_size;
};

AdjointLevel adjoint_level(const ShiftOperator& s, AlphaEngine& engine, const VertexId& u,
                           const TreeWindow* window, const Tolerances& tol) {
  const auto& tree = s.tree();
  AdjointLevel out;
  out.entry.vertex = u;
  out.entry.level = tree.level(u);
  out.h.level = out.entry.level;
  out.entry.certified = true;

  if (tree.is_rooted()) {
    out.entry.status = Status::ExactZero;
    out.generation_size = tree.full_generation(u).value_or(std::vector<VertexId>{}).size();
    return out;
  }

  if (auto gen = tree.full_generation(u)) {
    out.generation_size = gen->size();
    double a = 0.0;
    bool all_zero = true;
    for (const auto& v : *gen) {
      const double l = s.ancestral_log_sum(v);
      if (l == -INFINITY) continue;
      all_zero = false;
      const double p = std::exp(l);
      out.h.h.add(v, p);
      a += p * p;
    }
    out.entry.estimate = out.entry.upper = std::min(a, 1.0);
    out.entry.status = all_zero ? Status::ExactZero : (a == 1.0 ? Status::ExactOne : Status::Converged);
    return out;
  }

  out.h.generation_complete = false;
  auto level_h = [&]() {
    if (!window) return;
    for (const auto& v : window->level_members(out.entry.level)) {
      const double l = s.ancestral_log_sum(v);
      if (l != -INFINITY) out.h.h.add(v, std::exp(l));
    }
  };

  // Every ancestral chain eventually runs up the spine, so a zero spine
  // product forces h_u = 0.
  VertexId top = u;
  while (tree.branch_of(top) != RayBranch::Spine) top = *tree.parent(top);
  if (s.ancestral_log_sum(top) == -INFINITY) {
    out.entry.status = Status::ExactZero;
    return out;
  }
  if (s.is_isometry()) {
    // s_n = 1 and the spine tail product tends to 1.
    out.entry.estimate = out.entry.upper = 1.0;
    out.entry.status = Status::ExactOne;
    level_h();
    return out;
  }

  // a_u = lim_n Pi(Par^n u) s_n(Par^n u), a nondecreasing sequence of lower bounds.
  out.entry.certified = false;
  out.entry.status = Status::MaxDepthReached;
  out.entry.upper = 1.0;
  double prev = 0.0;
  int streak = 0;
  VertexId w = u;
  for (std::size_t n = 1; n <= tol.max_depth; ++n) {
    w = *tree.parent(w);
    double cur = 0.0;
    try {
      const double l = s.ancestral_log_sum(w);
      cur = l == -INFINITY ? 0.0 : std::exp(2.0 * l) * engine.partial(w, n);
    } catch (const BudgetExhausted&) {
      break;
    }
    out.entry.partial_sums.push_back(cur);
    out.entry.depth = n;
    streak = std::abs(cur - prev) < tol.tol ? streak + 1 : 0;
    prev = cur;
    if (streak >= 3) {
      out.entry.status = Status::Converged;
      break;
    }
  }
  out.entry.estimate = std::clamp(prev, 0.0, 1.0);
  level_h();
  return out;
}

[[noreturn]] void violation(const std::string& property, const VertexId& v) {
  throw Error(ErrorCode::StructuralViolation, property + " fails at '" + v.str() + "'");
}

}  // namespace

std::string_view status_name(Status s) {
  switch (s) {
    case Status::Converged: return "converged";
    case Status::MaxDepthReached: return "max-depth";
    case Status::ExactZero: return "exact-zero";
    case Status::ExactOne: return "exact-one";
  }
  return "unknown";
}

const ProfileEntry* AsymptoticProfile::find(const VertexId& v) const {
  for (const auto& e : entries)
    if (e.vertex == v) return &e;
  return nullptr;
}

const ProfileEntry& AsymptoticProfile::at(const VertexId& v) const {
  if (auto* e = find(v)) return *e;
  throw Error(ErrorCode::UnknownVertex, "no profile entry for '" + v.str() + "'");
}

AsymptoticProfile alpha_profile(const ShiftOperator& s, const TreeWindow& window, const Tolerances& tol) {
  s.require_contraction(&window);
  AlphaEngine engine(s);
  AsymptoticProfile out;
  out.tolerances = tol;
  for (const auto& u : window.vertices()) out.entries.push_back(engine.forward(u, tol));
  return out;
}

ProfileEntry alpha_entry(const ShiftOperator& s, const VertexId& u, const Tolerances& tol) {
  s.require_contraction();
  AlphaEngine engine(s);
  return engine.forward(u, tol);
}

double alpha_partial_sum(const ShiftOperator& s, const VertexId& u, std::size_t n) {
  AlphaEngine engine(s);
  try {
    return engine.partial(u, n);
  } catch (const BudgetExhausted&) {
    throw Error(ErrorCode::ComputationBudget, "partial sum s_" + std::to_string(n) + "('" + u.str() + "')");
  }
}

StableSubtree stable_subtree(const ShiftOperator& s, const TreeWindow& window, const AsymptoticProfile& profile,
                             double zero_threshold, std::size_t multiplicity_cap) {
  const auto& tree = s.tree();
  StableSubtree out;
  out.zero_threshold = zero_threshold;
  for (const auto& e : profile.entries)
    if (e.estimate > zero_threshold) out.members.insert(e.vertex);

  for (const auto& u : out.members) {
    if (auto p = tree.parent(u); p && window.contains(*p) && !out.contains(*p)) violation("parent-closed", u);
    auto kids = tree.children(u);
    if (kids.empty()) violation("leafless", u);
    const bool all_in = std::all_of(kids.begin(), kids.end(), [&](const VertexId& c) { return window.contains(c); });
    const bool any_member = std::any_of(kids.begin(), kids.end(), [&](const VertexId& c) { return out.contains(c); });
    if (all_in && !any_member) violation("leafless", u);
  }
  if (auto root = tree.root(); root && !out.empty() && window.contains(*root) && !out.contains(*root))
    violation("contains-root", *root);

  if (out.empty()) {
    out.branching = BranchingCount::finite(0);
    return out;
  }

  auto alpha_of = [&](const VertexId& v) {
    if (auto* e = profile.find(v)) return e->estimate;
    return alpha_entry(s, v, profile.tolerances).estimate;
  };

  if (auto branching = tree.branching_vertices()) {
    std::size_t br = 0;
    for (const auto& b : *branching) {
      if (alpha_of(b) <= zero_threshold) continue;
      std::size_t kept = 0;
      for (const auto& c : tree.children(b))
        if (alpha_of(c) > zero_threshold) ++kept;
      if (kept > 1) br += kept - 1;
    }
    out.branching = BranchingCount::finite(br);
    return out;
  }

  std::size_t partial = 0;
  for (const auto& u : out.members) {
    auto kids = tree.children(u);
    if (!std::all_of(kids.begin(), kids.end(), [&](const VertexId& c) { return window.contains(c); })) continue;
    const auto kept = static_cast<std::size_t>(
        std::count_if(kids.begin(), kids.end(), [&](const VertexId& c) { return out.contains(c); }));
    if (kept > 1) partial += kept - 1;
  }
  auto sym = tree.symbolic_branching();
  if (sym && sym->infinite && partial > multiplicity_cap) {
    out.branching = BranchingCount::infinity();
  } else {
    out.branching = BranchingCount::finite(partial, false);
  }
  return out;
}

const ProfileEntry* AdjointProfile::find_level(std::int64_t level) const {
  for (const auto& e : levels)
    if (e.level == level) return &e;
  return nullptr;
}

const ProfileEntry& AdjointProfile::at_level(std::int64_t level) const {
  if (auto* e = find_level(level)) return *e;
  throw Error(ErrorCode::UnknownVertex, "no adjoint profile entry for level " + std::to_string(level));
}

const HVector& AdjointProfile::h_at_level(std::int64_t level) const {
  for (const auto& h : this->h)
    if (h.level == level) return h;
  throw Error(ErrorCode::UnknownVertex, "no h vector for level " + std::to_string(level));
}

AdjointProfile adjoint_profile(const ShiftOperator& s, const TreeWindow& window, const Tolerances& tol) {
  s.require_contraction(&window);
  AlphaEngine engine(s);
  AdjointProfile out;
  out.rooted = s.tree().is_rooted();
  out.tolerances = tol;
  for (std::int64_t lvl = window.min_level(); lvl <= window.max_level(); ++lvl) {
    auto members = window.level_members(lvl);
    if (members.empty()) continue;
    auto rec = adjoint_level(s, engine, members.front(), &window, tol);
    out.levels.push_back(std::move(rec.entry));
    out.h.push_back(std::move(rec.h));
    out.generation_size.push_back(rec.generation_size);
  }
  return out;
}

ProfileEntry adjoint_entry(const ShiftOperator& s, const VertexId& u, const Tolerances& tol) {
  s.require_contraction();
  AlphaEngine engine(s);
  return adjoint_level(s, engine, u, nullptr, tol).entry;
}

std::string_view class_name(ForwardClass c) {
  switch (c) {
    case ForwardClass::C0dot: return "C0.";
    case ForwardClass::C1dot: return "C1.";
    case ForwardClass::Mixed: return "mixed";
    case ForwardClass::Undetermined: return "undetermined";
  }
  return "undetermined";
}

std::string_view class_name(AdjointClass c) {
  switch (c) {
    case AdjointClass::Cdot0: return "C.0";
    case AdjointClass::Cdot1: return "C.1";
    case AdjointClass::Mixed: return "mixed";
    case AdjointClass::Undetermined: return "undetermined";
  }
  return "undetermined";
}

std::string Classification::summary() const {
  std::ostringstream os;
  os << "forward " << class_name(forward) << " (" << (forward_certified ? "certified" : "numerical") << "), adjoint "
     << class_name(adjoint) << " (" << (adjoint_certified ? "certified" : "numerical") << ")";
  return os.str();
}

Classification classify(const ShiftOperator& s, const AsymptoticProfile& forward, const AdjointProfile& adjoint,
                        const Tolerances& tol) {
  Classification out;

  std::size_t zero = 0, positive = 0, small = 0, open = 0;
  bool certified = true;
  for (const auto& e : forward.entries) {
    certified = certified && e.certified;
    if (e.status == Status::ExactZero || (e.status == Status::Converged && e.estimate <= tol.zero_threshold)) {
      ++zero;
    } else if (e.status == Status::ExactOne || (e.status == Status::Converged && e.estimate >= tol.one_sided)) {
      ++positive;
    } else if (e.status == Status::Converged) {
      ++small;
    } else {
      ++open;
    }
  }
  if (zero > 0 && (positive + small) > 0) {
    out.forward = ForwardClass::Mixed;
  } else if (open > 0 || small > 0) {
    out.forward = ForwardClass::Undetermined;
    if (open > 0) out.notes.push_back(std::to_string(open) + " alpha estimates hit the depth cap");
    if (small > 0) out.notes.push_back(std::to_string(small) + " alpha estimates between the zero and one-sided thresholds");
  } else if (zero > 0) {
    out.forward = ForwardClass::C0dot;
  } else if (positive > 0) {
    out.forward = ForwardClass::C1dot;
  }
  out.forward_certified = certified && out.forward != ForwardClass::Undetermined;

  if (adjoint.rooted || s.tree().is_rooted()) {
    out.adjoint = AdjointClass::Cdot0;
    out.adjoint_certified = true;
    out.notes.push_back("rooted tree: S* is stable");
    return out;
  }

  zero = positive = open = 0;
  certified = true;
  bool singleton = true;
  for (std::size_t i = 0; i < adjoint.levels.size(); ++i) {
    const auto& e = adjoint.levels[i];
    certified = certified && e.certified;
    const auto& g = adjoint.generation_size[i];
    singleton = singleton && g && *g == 1;
    if (e.status == Status::ExactZero || (e.status == Status::Converged && e.estimate <= tol.zero_threshold)) {
      ++zero;
    } else if (e.status == Status::ExactOne || e.estimate >= tol.one_sided ||
               (e.status == Status::Converged && e.estimate > tol.zero_threshold)) {
      ++positive;
    } else {
      ++open;
    }
  }
  if (zero > 0 && positive > 0) {
    out.adjoint = AdjointClass::Mixed;
    out.notes.push_back("adjoint profile is neither all zero nor all positive");
  } else if (open > 0) {
    out.adjoint = AdjointClass::Undetermined;
    out.notes.push_back(std::to_string(open) + " adjoint levels undecided at the depth cap");
  } else if (zero > 0) {
    out.adjoint = AdjointClass::Cdot0;
  } else if (singleton) {
    out.adjoint = AdjointClass::Cdot1;
  } else {
    out.adjoint = AdjointClass::Mixed;
    out.notes.push_back("a > 0 but generations have several vertices: A* has rank one per level");
  }
  out.adjoint_certified = certified && out.adjoint != AdjointClass::Undetermined;
  return out;
}

}  // namespace treeshift
