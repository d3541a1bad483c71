#include "treeshift/asymptote.hpp"

#include <algorithm>
#include <cmath>

#include "treeshift/error.hpp"

namespace treeshift {

namespace {

bool settled(Status s) { return s != Status::MaxDepthReached; }

double alpha_at(const ShiftOperator& s, const AsymptoticProfile& alpha, const VertexId& v) {
  if (auto* e = alpha.find(v)) return e->estimate;
  return alpha_entry(s, v, alpha.tolerances).estimate;
}

}  // namespace

std::string_view asymptote_name(AsymptoteType t) {
  switch (t) {
    case AsymptoteType::UnilateralShift: return "unilateral";
    case AsymptoteType::CnuUnilateral: return "cnu-unilateral";
    case AsymptoteType::BilateralPlusUnilateral: return "bilateral-plus-unilateral";
  }
  return "unknown";
}

std::string_view adjoint_shift_name(AdjointShiftType t) {
  return t == AdjointShiftType::SimpleUnilateral ? "simple-unilateral" : "simple-bilateral";
}

std::string_view decision_name(Decision d) {
  switch (d) {
    case Decision::Yes: return "yes";
    case Decision::No: return "no";
    case Decision::Undetermined: return "undetermined";
  }
  return "undetermined";
}

CnuTest cnu_test(const ShiftOperator& s, const TreeWindow& window, const AsymptoticProfile& alpha, std::size_t depth,
                 const Tolerances& tol) {
  const auto& tree = s.tree();
  CnuTest out;
  out.depth = depth;
  bool first = true;
  double lo = 0.0, hi = 0.0;
  for (std::int64_t lvl = window.min_level(); lvl <= window.max_level(); ++lvl) {
    std::optional<VertexId> rep;
    for (const auto& v : window.level_members(lvl)) {
      if (alpha_at(s, alpha, v) > tol.zero_threshold) {
        rep = v;
        break;
      }
    }
    if (!rep) continue;
    // prod_{j<D} beta^2_{Par^j w} = alpha_w prod_{j<D} lambda^2_{Par^j w} / alpha_{Par^D w}
    VertexId w = *rep;
    std::size_t climbed = 0;
    for (; climbed < depth; ++climbed) {
      auto p = tree.parent(w);
      if (!p) break;
      w = *p;
    }
    VertexId top = w;
    std::size_t steps = 0;
    for (; steps < depth; ++steps) {
      auto p = tree.parent(top);
      if (!p) break;
      top = *p;
    }
    const double alpha_w = alpha_at(s, alpha, w);
    const double alpha_top = alpha_at(s, alpha, top);
    const double l = s.ancestral_log_sum(w, steps);
    double value = alpha_top > 0.0 ? alpha_w * std::exp(2.0 * l) / alpha_top : 0.0;
    value = std::min(value, 1.0);
    out.per_level[lvl] = value;
    if (first) {
      out.value = value;
      lo = hi = value;
      first = false;
    }
    lo = std::min(lo, value);
    hi = std::max(hi, value);
  }
  out.spread = hi - lo;
  return out;
}

AsymptoteDescriptor isometric_asymptote(const ShiftOperator& s, const TreeWindow& window,
                                        const AsymptoticProfile& alpha, const StableSubtree& stable,
                                        const Tolerances& tol) {
  if (stable.empty())
    throw Error(ErrorCode::StableSubtreeEmpty, "every orbit tends to 0 (class C0.); there is no isometric asymptote");
  const auto& tree = s.tree();
  AsymptoteDescriptor out;
  for (const auto& v : window.vertices()) {
    if (!stable.contains(v)) continue;
    auto p = tree.parent(v);
    if (!p || !window.contains(*p)) continue;
    const auto& ev = alpha.at(v);
    const auto& ep = alpha.at(*p);
    if (!settled(ev.status) || !settled(ep.status)) {
      out.unavailable.push_back(v);
      continue;
    }
    out.beta[v] = s.weight(v) * std::sqrt(ev.estimate / ep.estimate);
  }

  out.multiplicity = stable.branching;
  if (tree.is_rooted()) {
    out.type = AsymptoteType::UnilateralShift;
    if (!out.multiplicity.infinite) out.multiplicity.value += 1;
    return out;
  }
  out.cnu = cnu_test(s, window, alpha, tol.max_depth, tol);
  out.type = out.cnu.value <= tol.zero_threshold ? AsymptoteType::CnuUnilateral
                                                 : AsymptoteType::BilateralPlusUnilateral;
  return out;
}

AdjointAsymptoteDescriptor adjoint_isometric_asymptote(const ShiftOperator& s, const AdjointProfile& adjoint,
                                                       const Tolerances& tol) {
  const auto& tree = s.tree();
  if (adjoint.rooted || tree.is_rooted())
    throw Error(ErrorCode::AdjointStable, "rooted tree: S* is stable (class C.0)");
  bool any_positive = false;
  for (const auto& e : adjoint.levels) any_positive = any_positive || e.estimate > tol.zero_threshold;
  if (!any_positive) throw Error(ErrorCode::AdjointStable, "a_u = 0 on every level (class C.0)");

  AdjointAsymptoteDescriptor out;
  out.last_level = tree.last_level();
  out.type = out.last_level ? AdjointShiftType::SimpleUnilateral : AdjointShiftType::SimpleBilateral;
  for (const auto& e : adjoint.levels) {
    double a_parent = 0.0;
    if (auto* pe = adjoint.find_level(e.level - 1)) {
      a_parent = pe->estimate;
    } else {
      a_parent = adjoint_entry(s, *tree.parent(e.vertex), adjoint.tolerances).estimate;
    }
    if (a_parent > 0.0) out.coefficients[e.level] = std::sqrt(e.estimate / a_parent);
  }
  return out;
}

double intertwining_residual(const ShiftOperator& s, const AsymptoteDescriptor& u, const AsymptoticProfile& alpha,
                             const TreeWindow& window) {
  double worst = 0.0;
  for (const auto& v : window.interior()) {
    auto kids = s.weighted_children(v);
    SparseVector lhs;
    for (const auto& [c, lam] : kids) lhs.add(c, lam * std::sqrt(alpha.at(c).estimate));
    SparseVector rhs;
    bool complete = true;
    for (const auto& [c, lam] : kids) {
      if (auto it = u.beta.find(c); it != u.beta.end()) {
        rhs.add(c, std::sqrt(alpha.at(v).estimate) * it->second);
      } else if (std::find(u.unavailable.begin(), u.unavailable.end(), c) != u.unavailable.end()) {
        complete = false;
      }
    }
    if (!complete) continue;
    worst = std::max(worst, (lhs - rhs).norm());
  }
  return worst;
}

double adjoint_intertwining_residual(const ShiftOperator& s, const AdjointAsymptoteDescriptor& u,
                                     const AdjointProfile& adjoint) {
  double worst = 0.0;
  for (std::size_t i = 0; i < adjoint.levels.size(); ++i) {
    const auto& e = adjoint.levels[i];
    const auto& h = adjoint.h[i];
    const auto* pe = adjoint.find_level(e.level - 1);
    auto coeff = u.coefficients.find(e.level);
    if (!pe || coeff == u.coefficients.end() || !h.generation_complete) continue;
    const auto& hp = adjoint.h_at_level(e.level - 1);
    if (!hp.generation_complete || pe->estimate <= 0.0) continue;
    // A_*^{1/2} acts on the level of Par(u) as sqrt(a') h' h'^T / a'.
    const SparseVector x = apply_adjoint(s, h.h);
    SparseVector lhs = hp.h;
    lhs.scale(std::sqrt(pe->estimate) * x.dot(hp.h) / pe->estimate);
    SparseVector rhs = hp.h;
    rhs.scale(std::sqrt(e.estimate) * coeff->second);
    worst = std::max(worst, (lhs - rhs).norm());
  }
  return worst;
}

double isometry_defect(const ShiftOperator& s, const AsymptoteDescriptor& u, const StableSubtree& stable,
                       const TreeWindow& window) {
  double worst = 0.0;
  for (const auto& v : window.interior()) {
    if (!stable.contains(v)) continue;
    double sum = 0.0;
    bool complete = true;
    for (const auto& c : s.tree().children(v)) {
      if (!stable.contains(c)) continue;
      auto it = u.beta.find(c);
      if (it == u.beta.end()) {
        complete = false;
        break;
      }
      sum += it->second * it->second;
    }
    if (complete) worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

SimilarityDecision similar_to_isometry(const ShiftOperator& s, const AsymptoticProfile& alpha, const Tolerances& tol) {
  const auto& tree = s.tree();
  SimilarityDecision out;
  for (const auto& e : alpha.entries) {
    if (e.status == Status::ExactZero) {
      out.decision = Decision::No;
      out.value = 0.0;
      out.reason = "alpha vanishes at '" + e.vertex.str() + "'";
      return out;
    }
  }

  std::optional<double> inf;
  if (s.is_isometry()) {
    inf = 1.0;
  } else if (const auto* spine = dynamic_cast<const SpineTree*>(&tree)) {
    // Along a single-child chain alpha is nondecreasing downward, so the
    // infimum sits at the top of each chain or in the limit up the spine.
    const auto& shape = spine->shape();
    auto a = [&](const VertexId& v) { return alpha_entry(s, v, alpha.tolerances); };
    std::vector<ProfileEntry> candidates;
    if (shape.has_primed) candidates.push_back(a(VertexId::primed(1)));
    if (spine->branches()) candidates.push_back(a(VertexId::integer(1)));
    const VertexId top = shape.spine_min ? VertexId::integer(*shape.spine_min) : VertexId::integer(0);
    candidates.push_back(a(top));
    bool ok = std::all_of(candidates.begin(), candidates.end(), [](const ProfileEntry& e) { return e.certified; });
    if (ok) {
      double best = 1.0;
      for (const auto& e : candidates) best = std::min(best, e.estimate);
      if (!shape.spine_min) {
        const double l = s.ancestral_log_sum(top);
        best = std::min(best, candidates.back().estimate * (l == -INFINITY ? 0.0 : std::exp(2.0 * l)));
      }
      inf = best;
    }
  }

  if (!inf) {
    out.reason = "no symbolic infimum of alpha for this family";
    return out;
  }
  out.value = *inf;
  if (*inf > tol.zero_threshold) {
    out.decision = Decision::Yes;
    out.reason = "inf alpha > 0";
  } else {
    out.decision = Decision::No;
    out.reason = "inf alpha = 0";
  }
  return out;
}

SimilarityDecision similar_to_coisometry(const ShiftOperator& s, const Tolerances& tol) {
  const auto& tree = s.tree();
  SimilarityDecision out;
  if (tree.is_rooted()) {
    out.decision = Decision::No;
    out.reason = "rooted tree: S* is stable";
    return out;
  }
  auto br = tree.symbolic_branching();
  if (!br || br->infinite || br->value > 0) {
    out.decision = br ? Decision::No : Decision::Undetermined;
    out.reason = "some vertex has more than one child";
    return out;
  }
  // Rootless with |Chi(u)| <= 1: a bilateral path, possibly ending in a leaf.
  const VertexId base = tree.base();
  double l = s.ancestral_log_sum(base);
  std::string kind = "bilateral";
  if (auto ray = tree.ray_below(base); ray && !tree.is_leaf(base)) {
    if (ray->last_level) {
      kind = "backward";
      l += s.ray_log_sum(*ray);
    } else {
      l += s.ray_log_sum(*ray);
    }
  }
  out.value = l == -INFINITY ? 0.0 : std::exp(l);
  if (*out.value > tol.zero_threshold) {
    out.decision = Decision::Yes;
    out.reason = kind + " shift with positive weight product";
  } else {
    out.decision = Decision::No;
    out.reason = kind + " shift with vanishing weight product";
  }
  return out;
}

}  // namespace treeshift
