#include "treeshift/cyclicity.hpp"

#include <algorithm>
#include <cmath>

#include "treeshift/error.hpp"

namespace treeshift {

namespace {

// Prefix sums of log weights along each branch: prefix[j][k] = sum_{t<k} log w_{j,t}.
std::vector<std::vector<double>> log_prefix(const BackwardShiftSpec& spec, std::int64_t top) {
  std::vector<std::vector<double>> out(spec.branches(), std::vector<double>(static_cast<std::size_t>(top) + 2, 0.0));
  for (std::size_t j = 0; j < spec.branches(); ++j)
    for (std::int64_t k = 0; k <= top; ++k)
      out[j][static_cast<std::size_t>(k) + 1] = out[j][static_cast<std::size_t>(k)] + std::log(spec.weight(j, k));
  return out;
}

// log W(l, k) = log(w_{j,k_l-1} ... w_{j,k_l-k}).
double log_w(const std::vector<std::vector<double>>& prefix, std::size_t j, std::int64_t kl, std::int64_t k) {
  return prefix[j][static_cast<std::size_t>(kl)] - prefix[j][static_cast<std::size_t>(kl - k)];
}

std::int64_t schedule_position(std::size_t branches, std::size_t l) {
  return static_cast<std::int64_t>(branches * l * (l + 1) / 2);
}

Eigen::Index flat(std::size_t j, std::int64_t k, std::int64_t top) {
  return static_cast<Eigen::Index>(j) * (top + 1) + k;
}

Eigen::VectorXd apply_backward(const BackwardShiftSpec& spec, const Eigen::VectorXd& v, std::int64_t top) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (std::size_t j = 0; j < spec.branches(); ++j)
    for (std::int64_t k = 1; k <= top; ++k) out(flat(j, k - 1, top)) = spec.weight(j, k - 1) * v(flat(j, k, top));
  return out;
}

Verdict make(VerdictKind kind, std::string rule, std::string anchor, std::string reason) {
  Verdict v;
  v.kind = kind;
  v.rule = std::move(rule);
  v.anchors = {std::move(anchor)};
  v.reason = std::move(reason);
  return v;
}

}  // namespace

double BackwardShiftSpec::weight(std::size_t j, std::int64_t k) const {
  const auto& w = weights.at(j);
  if (k >= 0 && static_cast<std::size_t>(k) < w.size()) return w[static_cast<std::size_t>(k)];
  return tail;
}

std::vector<std::pair<std::size_t, std::int64_t>> BackwardShiftSpec::zero_weights() const {
  std::vector<std::pair<std::size_t, std::int64_t>> out;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    for (std::size_t k = 0; k < weights[j].size(); ++k)
      if (weights[j][k] == 0.0) out.emplace_back(j, static_cast<std::int64_t>(k));
    if (tail == 0.0) out.emplace_back(j, static_cast<std::int64_t>(weights[j].size()));
  }
  return out;
}

void BackwardShiftSpec::validate() const {
  if (weights.empty()) throw Error(ErrorCode::InvalidSpec, "backward shift needs at least one branch");
  auto bad = [](double w) { return !std::isfinite(w) || w < 0.0 || w > 1.0; };
  if (bad(tail)) throw Error(ErrorCode::InvalidSpec, "tail weight must lie in [0, 1]");
  for (const auto& branch : weights)
    for (double w : branch)
      if (bad(w)) throw Error(ErrorCode::InvalidSpec, "backward shift weights must lie in [0, 1]");
}

double sigma_m(const CyclicCandidate& c, const BackwardShiftSpec& spec, std::size_t m) {
  const std::size_t big_l = c.length();
  if (m < 1 || m > big_l) throw Error(ErrorCode::InvalidSpec, "sigma index out of range");
  const auto prefix = log_prefix(spec, c.top());
  const std::size_t im = m - 1;
  const std::int64_t k_prev = m == 1 ? -1 : c.position[im - 1];
  double best = 0.0;
  for (std::int64_t k = k_prev + 1; k <= c.position[im]; ++k) {
    const double denom = std::log(c.xi[im]) + log_w(prefix, c.branch[im], c.position[im], k);
    double sum = 0.0;
    for (std::size_t il = im + 1; il < big_l; ++il) {
      const double num = std::log(c.xi[il]) + log_w(prefix, c.branch[il], c.position[il], k);
      sum += std::exp(2.0 * (num - denom));
    }
    best = std::max(best, sum);
  }
  return best;
}

std::size_t rescale_pass(CyclicCandidate& c, const BackwardShiftSpec& spec) {
  std::size_t fired = 0;
  for (std::size_t m = 1; m <= c.length(); ++m) {
    const double sigma = sigma_m(c, spec, m);
    const double bound = std::ldexp(1.0, -static_cast<int>(m));
    if (sigma <= bound) continue;
    double factor = 1.0;
    double current = sigma;
    // Rounding can leave Sigma_m a few ulps above the bound.
    for (int attempt = 0; attempt < 8 && current > bound; ++attempt) {
      const double step = std::sqrt(bound / current) * (1.0 - 0x1p-48);
      for (std::size_t il = m; il < c.length(); ++il) c.xi[il] *= step;
      factor *= step;
      current = sigma_m(c, spec, m);
    }
    c.log.push_back({m, sigma, factor});
    ++fired;
  }
  return fired;
}

CyclicCandidate construct_backward_cyclic(const BackwardShiftSpec& spec, std::size_t length) {
  spec.validate();
  const std::size_t j = spec.branches();
  if (length < 4 * j)
    throw Error(ErrorCode::ScheduleTooShort,
                "length " + std::to_string(length) + " < 4 * " + std::to_string(j) + " branches");
  CyclicCandidate c;
  for (std::size_t l = 1; l <= length; ++l) {
    c.branch.push_back((l - 1) % j);
    c.position.push_back(schedule_position(j, l));
    c.xi.push_back(std::ldexp(1.0, -static_cast<int>(l)));
  }
  for (std::size_t b = 0; b < j; ++b)
    for (std::int64_t k = 0; k < c.top(); ++k)
      if (spec.weight(b, k) == 0.0)
        throw Error(ErrorCode::ZeroWeight, "w_{" + std::to_string(b) + "," + std::to_string(k) + "} = 0");
  rescale_pass(c, spec);
  return c;
}

double orbit_tail_norm(const CyclicCandidate& c, const BackwardShiftSpec& spec, std::size_t m, std::int64_t k) {
  const std::int64_t top = c.top();
  Eigen::VectorXd v = candidate_vector(c, spec.branches(), top);
  for (std::int64_t n = 0; n < k; ++n) v = apply_backward(spec, v, top);
  const std::size_t im = m - 1;
  double w = 1.0;
  for (std::int64_t t = 1; t <= k; ++t) w *= spec.weight(c.branch[im], c.position[im] - t);
  v /= c.xi[im] * w;
  v(flat(c.branch[im], c.position[im] - k, top)) -= 1.0;
  return v.squaredNorm();
}

Eigen::VectorXd candidate_vector(const CyclicCandidate& c, std::size_t branches, std::int64_t top) {
  top = std::max(top, c.top());
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(branches) * (top + 1));
  for (std::size_t l = 0; l < c.length(); ++l) f(flat(c.branch[l], c.position[l], top)) = c.xi[l];
  return f;
}

Eigen::MatrixXd backward_matrix(const BackwardShiftSpec& spec, std::int64_t window_k) {
  const Eigen::Index d = static_cast<Eigen::Index>(spec.branches()) * (window_k + 1);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t j = 0; j < spec.branches(); ++j)
    for (std::int64_t k = 1; k <= window_k; ++k) m(flat(j, k - 1, window_k), flat(j, k, window_k)) = spec.weight(j, k - 1);
  return m;
}

CyclicVerification verify_cyclic_candidate(const BackwardShiftSpec& spec, const Eigen::VectorXd& f, std::int64_t top,
                                           std::int64_t window_k, double rank_tol, std::size_t cap) {
  const std::size_t branches = spec.branches();
  const std::size_t d = branches * static_cast<std::size_t>(window_k + 1);
  if (d > cap) throw Error(ErrorCode::DimensionCap, std::to_string(d) + " exceeds the cap of " + std::to_string(cap));
  if (f.size() != static_cast<Eigen::Index>(branches) * (top + 1))
    throw Error(ErrorCode::ShapeMismatch, "candidate vector does not match the branch layout");

  // Lift to a layout that contains the window.
  const std::int64_t full = std::max(top, window_k);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(branches) * (full + 1));
  for (std::size_t j = 0; j < branches; ++j)
    for (std::int64_t k = 0; k <= top; ++k) v(flat(j, k, full)) = f(flat(j, k, top));

  const Eigen::Index steps = full + 1;
  Eigen::MatrixXd orbit(static_cast<Eigen::Index>(d), steps);
  for (Eigen::Index n = 0; n < steps; ++n) {
    for (std::size_t j = 0; j < branches; ++j)
      for (std::int64_t k = 0; k <= window_k; ++k) orbit(flat(j, k, window_k), n) = v(flat(j, k, full));
    v = apply_backward(spec, v, full);
  }

  CyclicVerification out;
  out.dimension = d;
  out.orbit_length = static_cast<std::size_t>(steps);
  out.rank = numerical_rank(orbit, rank_tol);
  out.residual = max_projection_residual(orthonormal_span(orbit, rank_tol));
  return out;
}

CyclicVerification verify_cyclic_candidate(const BackwardShiftSpec& spec, const CyclicCandidate& c,
                                           std::int64_t window_k, double rank_tol, std::size_t cap) {
  return verify_cyclic_candidate(spec, candidate_vector(c, spec.branches(), c.top()), c.top(), window_k, rank_tol,
                                 cap);
}

ZeroSplitCandidate construct_with_nilpotent(const BackwardShiftSpec& spec, std::size_t length, std::int64_t window_k) {
  spec.validate();
  const auto zeros = spec.zero_weights();
  if (zeros.size() != 1) throw Error(ErrorCode::InvalidSpec, "expected exactly one zero weight");
  const auto [jz, z] = zeros.front();

  // Below the zero, branch jz restarts at index z + 1.
  BackwardShiftSpec positive = spec;
  auto& w = positive.weights[jz];
  w.erase(w.begin(), w.begin() + std::min<std::ptrdiff_t>(z + 1, static_cast<std::ptrdiff_t>(w.size())));

  ZeroSplitCandidate out;
  out.positive_part = construct_backward_cyclic(positive, length);
  const auto& c = out.positive_part;
  std::int64_t top = window_k;
  for (std::size_t l = 0; l < c.length(); ++l)
    top = std::max(top, c.position[l] + (c.branch[l] == jz ? z + 1 : 0));
  out.top = top;
  out.f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.branches()) * (top + 1));
  for (std::size_t l = 0; l < c.length(); ++l) {
    const std::int64_t k = c.position[l] + (c.branch[l] == jz ? z + 1 : 0);
    out.f(flat(c.branch[l], k, top)) = c.xi[l];
  }
  out.f(flat(jz, z, top)) = 1.0;
  return out;
}

std::size_t backward_cokernel(const BackwardShiftSpec& spec, std::int64_t window_k, double rank_tol) {
  const auto m = backward_matrix(spec, window_k);
  return cokernel_dimension(m, rank_tol) - spec.branches();
}

std::vector<double> range_membership_sums(const BackwardShiftSpec& spec, const CyclicCandidate& c, std::size_t n_max) {
  std::vector<double> out;
  for (std::size_t n = 1; n <= n_max; ++n) {
    double sum = 0.0;
    for (std::size_t l = 0; l < c.length(); ++l) {
      double w = 1.0;
      for (std::size_t t = 0; t < n; ++t) w *= spec.weight(c.branch[l], c.position[l] + static_cast<std::int64_t>(t));
      sum += w == 0.0 ? INFINITY : (c.xi[l] * c.xi[l]) / (w * w);
    }
    out.push_back(sum);
  }
  return out;
}

WindowCorank window_corank(const ShiftOperator& s, const TreeWindow& window, double rank_tol) {
  WindowCorank out;
  out.raw = cokernel_dimension(dense_truncation(s, window), rank_tol);
  for (const auto& v : window.vertices()) {
    auto p = s.tree().parent(v);
    if (p && !window.contains(*p)) ++out.boundary;
  }
  out.adjusted = out.raw >= out.boundary ? out.raw - out.boundary : 0;
  return out;
}

std::string_view verdict_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::Cyclic: return "cyclic";
    case VerdictKind::NonCyclic: return "non-cyclic";
    case VerdictKind::AdjointCyclic: return "adjoint-cyclic";
    case VerdictKind::Unknown: return "unknown";
  }
  return "unknown";
}

Verdict cyclicity_verdict(const ShiftOperator& s, const Classification& c) {
  const auto& tree = s.tree();
  const bool rooted = tree.is_rooted();
  const auto br = tree.symbolic_branching();
  const auto leaves = tree.symbolic_leaves();
  const bool br_known = br && br->exact;
  auto br_is = [&](std::size_t n) { return br_known && !br->infinite && br->value == n; };
  const std::size_t leaf_count = leaves ? leaves->size() : 0;

  if (rooted && br_known && (br->infinite || br->value > 0))
    return make(VerdictKind::NonCyclic, "R1", "Sec 6 co-rank", "rooted with Br(T) > 0: co-rank exceeds 1");
  if (!rooted && br_known && (br->infinite || br->value > 1))
    return make(VerdictKind::NonCyclic, "R2", "Sec 6 co-rank", "rootless with Br(T) > 1: co-rank exceeds 1");
  if (!rooted && br_is(0) && leaves && leaf_count == 1)
    return make(VerdictKind::Cyclic, "R3", "Thm 5.4", "backward shift with positive weights");
  if (!rooted && br_is(1) && leaves && leaf_count == 2)
    return make(VerdictKind::Cyclic, "R4", "Thm 6.2", "rootless, Br(T) = 1, two leaves");
  if (!rooted && br_is(1) && leaves && leaf_count == 1 && c.adjoint != AdjointClass::Cdot0 &&
      c.adjoint != AdjointClass::Undetermined)
    return make(VerdictKind::Cyclic, "R5", "Thm 6.3", "rootless, Br(T) = 1, one leaf, S not in C.0");
  if (!rooted && br_is(0) && leaves && leaf_count == 0 && c.adjoint == AdjointClass::Cdot1)
    return make(VerdictKind::Cyclic, "R5'", "Sec 2 bilateral C.1", "bilateral shift of class C.1");
  if (!rooted && br_is(1) && c.forward == ForwardClass::C1dot)
    return make(VerdictKind::NonCyclic, "R6", "Thm 6.5", "rootless, Br(T) = 1, class C1.: asymptote is the direct sum of two unilateral shifts");
  if (rooted && c.forward == ForwardClass::C1dot)
    return make(VerdictKind::AdjointCyclic, "R7", "Thm 7.3(i)", "rooted and of class C1.");
  if (!rooted && br_known && !br->infinite && c.forward == ForwardClass::C1dot)
    return make(VerdictKind::AdjointCyclic, "R8", "Thm 7.3(ii)", "rootless, Br(T) finite, class C1.");

  Verdict v;
  v.kind = VerdictKind::Unknown;
  v.reason = "no rule applies";
  if (!br_known) v.blockers.push_back("branching index not known exactly");
  if (!leaves) v.blockers.push_back("leaf set not known");
  if (c.forward == ForwardClass::Undetermined) v.blockers.push_back("forward class undetermined");
  if (c.adjoint == AdjointClass::Undetermined) v.blockers.push_back("adjoint class undetermined");
  if (!rooted && br_is(0) && leaf_count == 0)
    v.blockers.push_back("bilateral shift outside C.1: cyclicity has no characterization");
  if (!rooted && br_is(1) && leaf_count == 1 && c.adjoint == AdjointClass::Cdot0)
    v.blockers.push_back("one leaf and S in C.0: depends on cyclicity of the bilateral part");
  if (rooted && br_is(0)) v.blockers.push_back("rooted path not of class C1.");
  if (v.blockers.empty()) v.blockers.push_back("classification outside every rule");
  return v;
}

Verdict backward_shift_verdict(const BackwardShiftSpec& spec) {
  spec.validate();
  const auto zeros = spec.zero_weights();
  if (zeros.size() <= 1)
    return make(VerdictKind::Cyclic, "R3", "Thm 5.4", "backward shift with at most one zero weight");
  return make(VerdictKind::NonCyclic, "R3", "Thm 5.4",
              std::to_string(zeros.size()) + " zero weights: range has co-dimension above 1");
}

double ray_swap_commutator(const ShiftOperator& s, const TreeWindow& window) {
  const auto* spine = dynamic_cast<const SpineTree*>(&s.tree());
  if (!spine || !spine->branches()) throw Error(ErrorCode::ShapeMismatch, "ray swap needs a tree with two rays below 0");
  auto swap = [&](const SparseVector& x) {
    SparseVector out;
    for (const auto& [v, c] : x) {
      const auto lvl = s.tree().level(v);
      if (lvl < 1) {
        out.add(v, c);
        continue;
      }
      VertexId mirror = s.tree().branch_of(v) == RayBranch::Primed ? VertexId::integer(lvl) : VertexId::primed(lvl);
      if (!s.tree().contains(mirror)) throw Error(ErrorCode::ShapeMismatch, "rays have different lengths");
      out.add(mirror, c);
    }
    return out;
  };
  double worst = 0.0;
  for (const auto& u : window.interior()) {
    const auto e = SparseVector::basis(u);
    worst = std::max(worst, (apply(s, swap(e)) - swap(apply(s, e))).norm());
  }
  return worst;
}

}  // namespace treeshift
