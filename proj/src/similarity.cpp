#include "treeshift/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "treeshift/error.hpp"
#include "treeshift/linalg.hpp"

namespace treeshift {

namespace {

const SpineTree& require_two_rays(const ShiftOperator& s) {
  const auto* spine = dynamic_cast<const SpineTree*>(&s.tree());
  if (!spine || !spine->branches() || s.tree().is_rooted())
    throw Error(ErrorCode::ShapeMismatch, "expected a rootless tree whose vertex 0 has children 1 and 1'");
  return *spine;
}

// Primed index k of a primed token, or nothing for spine vertices.
std::optional<std::int64_t> primed_index(const DirectedTree& tree, const VertexId& v) {
  if (tree.branch_of(v) != RayBranch::Primed) return std::nullopt;
  return tree.level(v);
}

double tail_sup(const ShiftOperator& s, RayBranch branch, std::int64_t from) {
  const auto& w = s.weights();
  switch (w.kind) {
    case WeightAssignment::Kind::Constant:
      return w.rule.value;
    case WeightAssignment::Kind::Family:
      return (branch == RayBranch::Primed ? w.primed_rule() : w.rule).sup(from, std::nullopt);
    case WeightAssignment::Kind::Map: {
      double best = *w.fallback;
      for (const auto& [v, val] : w.values)
        if (s.tree().branch_of(v) == branch && s.tree().level(v) >= from) best = std::max(best, val);
      return best;
    }
  }
  return INFINITY;
}

bool rays_identical(const WeightAssignment& w) {
  if (w.kind == WeightAssignment::Kind::Constant) return true;
  return w.kind == WeightAssignment::Kind::Family && (!w.primed || *w.primed == w.rule);
}

struct Core {
  const ShiftOperator& s;
  std::map<std::int64_t, GVector> g;

  const GVector& get(std::int64_t k) {
    auto it = g.find(k);
    if (it == g.end()) it = g.emplace(k, g_vector(s, k)).first;
    return it->second;
  }

  SparseVector column(const VertexId& v) {
    if (auto k = primed_index(s.tree(), v)) {
      const auto& gk = get(*k);
      return (1.0 / gk.norm) * gk.g;
    }
    return SparseVector::basis(v);
  }

  // T* e_v for the target shift.
  SparseVector target_adjoint(const VertexId& v, const std::map<VertexId, double>& weights) {
    auto it = weights.find(v);
    if (it == weights.end()) return {};
    if (auto k = primed_index(s.tree(), v)) return SparseVector::basis(VertexId::primed(*k - 1), it->second);
    return SparseVector::basis(VertexId::integer(s.tree().level(v) - 1), it->second);
  }
};

SimilarityWitness build(const ShiftOperator& s, SimilarityTarget target, TreeWindow window, RatioCertificate ratio) {
  Core core{s, {}};
  SimilarityWitness w{.target = target, .window = std::move(window)};
  const auto& tree = s.tree();

  for (const auto& v : w.window.vertices()) {
    if (auto k = primed_index(tree, v)) {
      const double norm = core.get(*k).norm;
      if (*k > 1) w.target_weights[v] = core.get(*k - 1).norm / norm;
    } else {
      w.target_weights[v] = s.weight(v);
    }
  }
  for (const auto& [k, gk] : core.g) w.g.push_back(gk);

  for (const auto& v : w.window.vertices()) {
    const auto lhs = apply_adjoint(s, core.column(v));
    SparseVector rhs;
    for (const auto& [u, c] : core.target_adjoint(v, w.target_weights)) rhs.axpy(c, core.column(u));
    w.residual = std::max(w.residual, (lhs - rhs).norm());
  }

  for (const auto& gk : w.g) {
    const double r = ray_ratio(s, gk.k);
    w.blocks.push_back({gk.k, -1.0 / std::sqrt(1.0 + r * r), std::sqrt(2.0 * (1.0 + r * r))});
  }

  w.ratio = std::move(ratio);
  if (w.ratio.kind == RatioKind::Bounded) {
    w.mode = WitnessMode::Similar;
    w.inverse_bound = std::sqrt(2.0 * (1.0 + w.ratio.bound * w.ratio.bound));
  }

  const auto y = w.dense();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(y);
  const auto& sv = svd.singularValues();
  w.condition_estimate = sv(0) / sv(sv.size() - 1);
  w.window_rank = numerical_rank(y);
  return w;
}

}  // namespace

GVector g_vector(const ShiftOperator& s, std::int64_t k) {
  require_two_rays(s);
  if (k < 1) throw Error(ErrorCode::ShapeMismatch, "g_k needs k >= 1");
  const auto e = VertexId::integer(k);
  const auto ep = VertexId::primed(k);
  if (!s.tree().contains(e) || !s.tree().contains(ep))
    throw Error(ErrorCode::ShapeMismatch, "g_" + std::to_string(k) + " needs both " + e.str() + " and " + ep.str());
  double log_a = 0.0;
  double log_b = 0.0;
  for (std::int64_t j = 1; j <= k; ++j) {
    log_a -= std::log(s.weight(VertexId::integer(j)));
    log_b -= std::log(s.weight(VertexId::primed(j)));
  }
  GVector out;
  out.k = k;
  out.g.set(e, std::exp(log_a));
  out.g.set(ep, -std::exp(log_b));
  out.norm = out.g.norm();
  return out;
}

double ray_ratio(const ShiftOperator& s, std::int64_t k) {
  double log_r = 0.0;
  for (std::int64_t j = 1; j <= k; ++j)
    log_r += std::log(s.weight(VertexId::primed(j))) - std::log(s.weight(VertexId::integer(j)));
  return std::exp(log_r);
}

std::string_view ratio_kind_name(RatioKind k) {
  switch (k) {
    case RatioKind::Bounded: return "bounded";
    case RatioKind::UnboundedEvidence: return "unbounded";
    case RatioKind::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::string_view witness_mode_name(WitnessMode m) {
  return m == WitnessMode::Similar ? "similar" : "quasiaffine-only";
}

RatioCertificate ratio_bounded(const ShiftOperator& s, std::int64_t horizon, double blowup) {
  const auto& spine = require_two_rays(s);
  RatioCertificate out;

  if (rays_identical(s.weights())) {
    out.kind = RatioKind::Bounded;
    out.sup = out.bound = 1.0;
    out.certified = true;
    out.reason = "both rays carry the same weights";
    return out;
  }

  std::optional<std::int64_t> last;
  if (spine.shape().primed_max) last = *spine.shape().primed_max;
  if (spine.shape().spine_max) last = std::min(last.value_or(*spine.shape().spine_max), *spine.shape().spine_max);
  const std::int64_t scan = last ? std::min(*last, horizon) : horizon;

  double log_r = 0.0;
  double log_sup = 0.0;
  for (std::int64_t k = 1; k <= scan; ++k) {
    log_r += std::log(s.weight(VertexId::primed(k))) - std::log(s.weight(VertexId::integer(k)));
    log_sup = std::max(log_sup, log_r);
    if (log_r > std::log(blowup)) {
      out.kind = RatioKind::UnboundedEvidence;
      out.k = k;
      out.value = std::exp(log_r);
      out.sup = out.value;
      out.reason = "R_k exceeds the blow-up bound";
      return out;
    }
  }
  out.sup = std::exp(log_sup);

  if (last && *last <= horizon) {
    out.kind = RatioKind::Bounded;
    out.bound = out.sup;
    out.certified = true;
    out.reason = "finite ray: finitely many ratios";
    return out;
  }

  // Constant rules on both rays: R_k changes by the fixed factor c'/c.
  const auto& w = s.weights();
  if (w.kind == WeightAssignment::Kind::Family && w.rule.is_constant() && w.primed_rule().is_constant()) {
    const double step = std::log(w.primed_rule().value) - std::log(w.rule.value);
    out.certified = true;
    if (step <= 0.0) {
      out.kind = RatioKind::Bounded;
      out.bound = out.sup;
      out.reason = "constant rays with primed weight at most the unprimed one";
      return out;
    }
    out.kind = RatioKind::UnboundedEvidence;
    out.k = scan + static_cast<std::int64_t>(std::floor((std::log(blowup) - log_r) / step)) + 1;
    out.value = std::exp(log_r + step * static_cast<double>(out.k - scan));
    out.sup = out.value;
    out.reason = "constant rays with primed weight above the unprimed one";
    return out;
  }

  // Beyond the scan, R_k <= R_h / prod_{h<j<=k} lambda_j when the primed
  // weights are at most 1, and the unprimed tail product bounds the rest.
  const double primed_sup = tail_sup(s, RayBranch::Primed, scan + 1);
  const double spine_sup = tail_sup(s, RayBranch::Spine, scan + 1);
  const double spine_tail = s.ray_log_sum({RayBranch::Spine, scan + 1, std::nullopt});
  const double primed_tail = s.ray_log_sum({RayBranch::Primed, scan + 1, std::nullopt});
  if (primed_sup <= 1.0 && spine_sup <= 1.0 && std::isfinite(spine_tail)) {
    out.kind = RatioKind::Bounded;
    out.bound = std::max(out.sup, std::exp(log_r - spine_tail));
    out.certified = true;
    out.reason = "unprimed tail product is positive";
    return out;
  }
  if (std::isfinite(primed_tail) && spine_tail == -INFINITY) {
    out.kind = RatioKind::UnboundedEvidence;
    out.certified = true;
    out.reason = "primed tail product is positive, unprimed tail product is 0";
    std::int64_t k = scan;
    constexpr std::int64_t kSearch = 1'000'000;
    while (log_r <= std::log(blowup) && k < scan + kSearch) {
      ++k;
      log_r += std::log(s.weight(VertexId::primed(k))) - std::log(s.weight(VertexId::integer(k)));
    }
    out.k = k;
    out.value = std::exp(log_r);
    return out;
  }
  out.reason = "no tail bound and no blow-up up to the horizon";
  return out;
}

Eigen::MatrixXd SimilarityWitness::dense() const {
  const auto n = static_cast<Eigen::Index>(window.size());
  Eigen::MatrixXd y = Eigen::MatrixXd::Identity(n, n);
  std::map<std::int64_t, const GVector*> by_k;
  for (const auto& gk : g) by_k[gk.k] = &gk;
  for (const auto& v : window.vertices()) {
    auto k = primed_index(window.tree(), v);
    if (!k) continue;
    const auto col = static_cast<Eigen::Index>(window.index_of(v));
    y.col(col).setZero();
    const auto* gk = by_k.at(*k);
    for (const auto& [u, c] : gk->g) y(static_cast<Eigen::Index>(window.index_of(u)), col) = c / gk->norm;
  }
  return y;
}

Eigen::MatrixXd SimilarityWitness::target_adjoint_dense() const {
  const auto n = static_cast<Eigen::Index>(window.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [v, wt] : target_weights) {
    const auto& tree = window.tree();
    auto k = primed_index(tree, v);
    const VertexId p = k ? VertexId::primed(*k - 1) : VertexId::integer(tree.level(v) - 1);
    if (window.contains(p))
      t(static_cast<Eigen::Index>(window.index_of(p)), static_cast<Eigen::Index>(window.index_of(v))) = wt;
  }
  return t;
}

SimilarityWitness build_leaf_similarity(const ShiftOperator& s, std::int64_t levels) {
  const auto& spine = require_two_rays(s);
  const auto& shape = spine.shape();
  if (!shape.primed_max)
    throw Error(ErrorCode::ShapeMismatch, "the primed ray must end in a leaf k0'");
  const std::int64_t k0 = *shape.primed_max;
  if (shape.spine_max && *shape.spine_max < k0)
    throw Error(ErrorCode::ShapeMismatch, "the spine leaf j0 must satisfy j0 >= k0");
  TreeWindow window(s.tree_ptr(), -levels, std::max(levels, k0), 4);
  RatioCertificate ratio = ratio_bounded(s, k0);
  return build(s, SimilarityTarget::LeafSum, std::move(window), std::move(ratio));
}

SimilarityWitness build_tilde_quasiaffinity(const ShiftOperator& s, std::int64_t levels, std::int64_t horizon) {
  const auto& spine = require_two_rays(s);
  if (spine.shape().primed_max || spine.shape().spine_max)
    throw Error(ErrorCode::ShapeMismatch, "expected the tilde tree (no leaves)");
  try {
    s.require_contraction();
  } catch (const Error& e) {
    throw Error(ErrorCode::NotAContraction, e.detail() + "; rescale the weights by 1/||S||");
  }
  TreeWindow window(s.tree_ptr(), -levels, levels, 4);
  return build(s, SimilarityTarget::TildeSum, std::move(window), ratio_bounded(s, horizon));
}

DirectSumDecomposition direct_sum_decomposition(const SparseVector& x, const ShiftOperator& s) {
  require_two_rays(s);
  const auto& tree = s.tree();
  DirectSumDecomposition out;
  std::map<std::int64_t, double> xi_primed;
  for (const auto& [v, c] : x) {
    if (auto k = primed_index(tree, v)) {
      xi_primed[*k] = c;
    } else {
      out.e_part.add(v, c);
      if (tree.level(v) >= 1) out.nu[tree.level(v)] += c;
    }
  }
  for (const auto& [k, xi] : xi_primed) {
    const auto gk = g_vector(s, k);
    double log_p = 0.0;
    for (std::int64_t j = 1; j <= k; ++j) log_p += std::log(s.weight(VertexId::primed(j)));
    const double mu = -xi * gk.norm * std::exp(log_p);
    const double shift = ray_ratio(s, k) * xi;
    out.mu[k] = mu;
    out.nu[k] += shift;
    out.e_part.add(VertexId::integer(k), shift);
    out.g_part.axpy(mu / gk.norm, gk.g);
    out.mu_sum += (mu / gk.norm) * (mu / gk.norm);
  }
  for (const auto& [k, nu] : out.nu) out.nu_sum += nu * nu;
  out.residual = (x - out.e_part - out.g_part).norm();
  return out;
}

KrylovTransfer krylov_transfer(const ShiftOperator& s, const SimilarityWitness& w, const Eigen::VectorXd& x,
                               double rank_tol) {
  const Eigen::MatrixXd adj = dense_truncation(s, w.window).transpose();
  KrylovTransfer out;
  out.target_rank = krylov_rank(w.target_adjoint_dense(), x, rank_tol);
  out.source_rank = krylov_rank(adj, w.dense() * x, rank_tol);
  return out;
}

}  // namespace treeshift
