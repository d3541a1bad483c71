// Command-line front end: reads tree and weight specs, runs one analysis and
// prints a text report or JSON lines.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "treeshift/asymptote.hpp"
#include "treeshift/cyclicity.hpp"
#include "treeshift/error.hpp"
#include "treeshift/io.hpp"
#include "treeshift/similarity.hpp"

using namespace treeshift;

namespace {

struct Request {
  std::string tree_path;
  std::string weights_path;
  std::string backward_path;
  std::string levels;
  std::size_t breadth = 64;
  double tol = 1e-10;
  double zero_th = 1e-9;
  double rank_tol = 1e-8;
  std::size_t depth = 64;
  std::size_t length = 16;
  std::int64_t window_k = 50;
  std::size_t power = 6;
  bool json = false;

  Tolerances tolerances() const {
    Tolerances t;
    t.tol = tol;
    t.zero_threshold = zero_th;
    t.max_depth = depth;
    return t;
  }
};

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotAContraction: return 3;
    case ErrorCode::StableSubtreeEmpty:
    case ErrorCode::AdjointStable: return 4;
    case ErrorCode::DimensionCap:
    case ErrorCode::WindowTooLarge: return 5;
    case ErrorCode::ShapeMismatch: return 6;
    case ErrorCode::ComputationBudget: return 1;
    default: return 2;
  }
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

void emit(const std::string& line) { std::cout << line << '\n'; }

std::string join(const std::vector<VertexId>& vs) {
  std::string out;
  for (const auto& v : vs) out += (out.empty() ? "" : " ") + v.str();
  return out;
}

std::string quote(const std::string& s) { return "\"" + s + "\""; }

TreePtr load_tree(const Request& r) {
  if (r.tree_path.empty()) throw Error(ErrorCode::InvalidSpec, "--tree is required");
  return io::load_tree(r.tree_path);
}

ShiftOperator load_shift(const Request& r) {
  if (r.weights_path.empty()) throw Error(ErrorCode::InvalidSpec, "--weights is required");
  return ShiftOperator(load_tree(r), io::load_weights(r.weights_path));
}

TreeWindow make_window(const Request& r, const TreePtr& tree) {
  if (r.levels.empty()) return TreeWindow::standard(tree, r.breadth);
  const auto colon = r.levels.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::InvalidSpec, "--levels expects a:b");
  try {
    return TreeWindow(tree, std::stoll(r.levels.substr(0, colon)), std::stoll(r.levels.substr(colon + 1)), r.breadth);
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::InvalidSpec, "--levels expects integers a:b");
  }
}

std::string combined_class(const Classification& c) {
  const bool f = c.forward == ForwardClass::C0dot || c.forward == ForwardClass::C1dot;
  const bool a = c.adjoint == AdjointClass::Cdot0 || c.adjoint == AdjointClass::Cdot1;
  if (!f || !a) return "";
  return std::string("C") + (c.forward == ForwardClass::C1dot ? "1" : "0") + (c.adjoint == AdjointClass::Cdot1 ? "1" : "0");
}

int cmd_validate(const Request& r) {
  const auto tree = load_tree(r);
  const auto window = TreeWindow::standard(tree, r.breadth);
  const auto br = branching_index(*tree, window);
  const auto lv = leaves(*tree, window);
  if (r.json) {
    std::ostringstream os;
    os << "{\"family\":" << quote(tree->family()) << ",\"rooted\":" << (tree->is_rooted() ? "true" : "false");
    if (auto root = tree->root()) os << ",\"root\":" << quote(root->str());
    os << ",\"leaves\":[";
    bool first = true;
    for (const auto& v : lv) os << (first ? "" : ",") << quote(v.str()), first = false;
    os << "],\"branching\":" << (br.infinite ? quote("inf") : std::to_string(br.value))
       << ",\"branching_exact\":" << (br.exact ? "true" : "false") << "}";
    emit(os.str());
    return 0;
  }
  emit("family: " + tree->family());
  emit(std::string(tree->is_rooted() ? "rooted" : "rootless") + ", Br=" + br.to_string());
  if (auto root = tree->root()) emit("root: " + root->str());
  emit("leaves: " + (lv.empty() ? std::string("none") : join(to_vector(lv))));
  return 0;
}

int cmd_analyze(const Request& r) {
  const auto s = load_shift(r);
  const auto window = make_window(r, s.tree_ptr());
  const auto norm = s.norm(&window);
  s.require_contraction(&window);
  const auto tol = r.tolerances();
  const auto alpha = alpha_profile(s, window, tol);
  const auto adjoint = adjoint_profile(s, window, tol);
  const auto cls = classify(s, alpha, adjoint, tol);

  std::optional<StableSubtree> stable;
  std::optional<AsymptoteDescriptor> u;
  try {
    stable = stable_subtree(s, window, alpha, r.zero_th);
    if (!stable->empty()) u = isometric_asymptote(s, window, alpha, *stable, tol);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::StructuralViolation && e.code() != ErrorCode::StableSubtreeEmpty) throw;
    std::cerr << "note: " << e.what() << '\n';
  }

  if (r.json) {
    emit("{\"norm\":" + fmt(norm.value) + ",\"norm_exact\":" + (norm.exact ? "true" : "false") +
         ",\"contraction\":true}");
    for (const auto& line : io::to_json_lines(alpha)) emit("{\"alpha\":" + line + "}");
    if (stable) emit(io::to_json(*stable));
    for (const auto& line : io::to_json_lines(adjoint)) emit("{\"a\":" + line + "}");
    emit(io::to_json(cls));
    if (u) emit(io::to_json(*u));
    return 0;
  }
  emit("norm: " + fmt(norm.value) + (norm.exact ? " (exact)" : " (window)"));
  emit("contraction: yes");
  emit("alpha:");
  constexpr std::size_t kListed = 40;
  for (std::size_t i = 0; i < alpha.entries.size() && i < kListed; ++i) {
    const auto& e = alpha.entries[i];
    emit("  " + e.vertex.str() + "  " + fmt(e.estimate) + "  " + std::string(status_name(e.status)) +
         (e.certified ? "  certified" : "  numerical"));
  }
  if (alpha.entries.size() > kListed)
    emit("  (" + std::to_string(alpha.entries.size() - kListed) + " more; --json lists all)");
  if (stable) {
    emit("V': " + std::to_string(stable->members.size()) + " window vertices, Br(T')=" + stable->branching.to_string());
  }
  emit("a (per level):");
  for (const auto& e : adjoint.levels)
    emit("  level " + std::to_string(e.level) + "  " + fmt(e.estimate) + "  " + std::string(status_name(e.status)) +
         (e.certified ? "  certified" : "  numerical"));
  emit("classification: " + cls.summary());
  if (auto c = combined_class(cls); !c.empty()) emit("class: " + c);
  if (s.is_isometry() && cls.adjoint == AdjointClass::Cdot1) emit("unitary: C11");
  for (const auto& note : cls.notes) emit("note: " + note);
  if (u) emit("U: " + std::string(asymptote_name(u->type)) + ", multiplicity " + u->multiplicity.to_string());
  return 0;
}

int cmd_asymptote(const Request& r) {
  const auto s = load_shift(r);
  const auto window = make_window(r, s.tree_ptr());
  s.require_contraction(&window);
  const auto tol = r.tolerances();
  const auto alpha = alpha_profile(s, window, tol);
  const auto stable = stable_subtree(s, window, alpha, r.zero_th);
  const auto u = isometric_asymptote(s, window, alpha, stable, tol);
  const double residual = intertwining_residual(s, u, alpha, window);
  const double defect = isometry_defect(s, u, stable, window);
  if (r.json) {
    emit(io::to_json(u));
    emit("{\"intertwining_residual\":" + fmt(residual) + ",\"isometry_defect\":" + fmt(defect) + "}");
    return 0;
  }
  emit("U: " + std::string(asymptote_name(u.type)) + ", multiplicity " + u.multiplicity.to_string());
  emit("cnu test: " + fmt(u.cnu.value) + " (depth " + std::to_string(u.cnu.depth) + ")");
  emit("beta:");
  for (const auto& [v, b] : u.beta) emit("  " + v.str() + "  " + fmt(b));
  if (!u.unavailable.empty()) emit("unavailable: " + join(u.unavailable));
  emit("intertwining residual: " + fmt(residual));
  emit("isometry defect: " + fmt(defect));
  return 0;
}

int cmd_adjoint_asymptote(const Request& r) {
  const auto s = load_shift(r);
  const auto window = make_window(r, s.tree_ptr());
  s.require_contraction(&window);
  const auto tol = r.tolerances();
  const auto adjoint = adjoint_profile(s, window, tol);
  const auto u = adjoint_isometric_asymptote(s, adjoint, tol);
  const double residual = adjoint_intertwining_residual(s, u, adjoint);
  if (r.json) {
    emit(io::to_json(u));
    emit("{\"intertwining_residual\":" + fmt(residual) + "}");
    return 0;
  }
  emit("U_*: " + std::string(adjoint_shift_name(u.type)));
  for (const auto& [lvl, c] : u.coefficients) emit("  level " + std::to_string(lvl) + "  " + fmt(c));
  emit("intertwining residual: " + fmt(residual));
  return 0;
}

int cmd_cyclic(const Request& r) {
  if (!r.backward_path.empty()) {
    const auto spec = io::load_backward(r.backward_path);
    const auto verdict = backward_shift_verdict(spec);
    const auto zeros = spec.zero_weights();
    std::optional<CyclicCandidate> candidate;
    std::optional<CyclicVerification> check;
    if (zeros.empty()) {
      candidate = construct_backward_cyclic(spec, r.length);
      check = verify_cyclic_candidate(spec, *candidate, r.window_k, r.rank_tol);
    } else if (zeros.size() == 1) {
      const auto split = construct_with_nilpotent(spec, r.length, r.window_k);
      candidate = split.positive_part;
      check = verify_cyclic_candidate(spec, split.f, split.top, r.window_k, r.rank_tol);
    }
    if (r.json) {
      emit(io::to_json(verdict));
      if (candidate)
        for (const auto& line : io::to_json_lines(*candidate)) emit(line);
      if (check) emit(io::to_json(*check));
      if (zeros.size() > 1)
        emit("{\"cokernel\":" + std::to_string(backward_cokernel(spec, r.window_k, r.rank_tol)) + "}");
      return 0;
    }
    emit("verdict: " + std::string(verdict_name(verdict.kind)) + " (" + verdict.rule + ", " + verdict.anchors.front() +
         ")");
    emit("reason: " + verdict.reason);
    if (candidate) {
      emit("candidate (branch, position, coefficient):");
      for (std::size_t l = 0; l < candidate->length(); ++l)
        emit("  " + std::to_string(candidate->branch[l]) + "  " + std::to_string(candidate->position[l]) + "  " +
             fmt(candidate->xi[l]));
      emit("rescalings: " + std::to_string(candidate->log.size()));
    }
    if (check)
      emit("krylov rank: " + std::to_string(check->rank) + " / " + std::to_string(check->dimension) +
           ", residual " + fmt(check->residual));
    if (zeros.size() > 1)
      emit("cokernel (boundary adjusted): " + std::to_string(backward_cokernel(spec, r.window_k, r.rank_tol)));
    return 0;
  }

  const auto s = load_shift(r);
  const auto window = make_window(r, s.tree_ptr());
  s.require_contraction(&window);
  const auto tol = r.tolerances();
  const auto cls = classify(s, alpha_profile(s, window, tol), adjoint_profile(s, window, tol), tol);
  const auto verdict = cyclicity_verdict(s, cls);
  if (r.json) {
    emit(io::to_json(verdict));
    return 0;
  }
  emit("classification: " + cls.summary());
  emit("verdict: " + std::string(verdict_name(verdict.kind)) +
       (verdict.rule.empty() ? "" : " (" + verdict.rule + ", " + verdict.anchors.front() + ")"));
  emit("reason: " + verdict.reason);
  for (const auto& b : verdict.blockers) emit("blocker: " + b);
  return 0;
}

int cmd_similarity(const Request& r) {
  const auto s = load_shift(r);
  const auto* spine = dynamic_cast<const SpineTree*>(&s.tree());
  const bool tilde = spine && !spine->shape().primed_max && !spine->shape().spine_max;
  const auto w = tilde ? build_tilde_quasiaffinity(s) : build_leaf_similarity(s);
  if (r.json) {
    emit(io::to_json(w));
    return 0;
  }
  emit(std::string("target: ") + (w.target == SimilarityTarget::LeafSum ? "two-ray shift + nilpotent" : "two-ray shift"));
  emit("mode: " + std::string(witness_mode_name(w.mode)));
  emit("intertwining residual: " + fmt(w.residual));
  emit("ratio: " + std::string(ratio_kind_name(w.ratio.kind)) + ", sup " + fmt(w.ratio.sup) +
       (w.ratio.certified ? " (certified)" : "") + ", " + w.ratio.reason);
  if (w.inverse_bound) emit("inverse bound: " + fmt(*w.inverse_bound));
  emit("window condition estimate: " + fmt(w.condition_estimate));
  emit("window rank: " + std::to_string(w.window_rank) + " / " + std::to_string(w.window.size()));
  return 0;
}

int cmd_oracle(const Request& r) {
  const auto s = load_shift(r);
  const auto window = make_window(r, s.tree_ptr());
  const auto m = dense_truncation(s, window);
  double power_diff = 0.0;
  double adjoint_diff = 0.0;
  std::size_t checked = 0;
  // Compare closed powers with dense iteration where the orbit stays inside
  // the window.
  for (const auto& u : window.vertices()) {
    bool inside = true;
    for (std::size_t n = 1; n <= r.power && inside; ++n)
      for (const auto& [v, c] : power_closed(s, u, n)) inside = inside && window.contains(v);
    if (!inside) continue;
    Eigen::VectorXd x = to_dense(SparseVector::basis(u), window);
    Eigen::VectorXd y = x;
    for (std::size_t n = 1; n <= r.power; ++n) {
      x = m * x;
      y = m.transpose() * y;
      power_diff = std::max(power_diff, (x - to_dense(power_closed(s, u, n), window)).cwiseAbs().maxCoeff());
      Eigen::VectorXd closed = Eigen::VectorXd::Zero(y.size());
      for (const auto& [v, c] : adjoint_power_closed(s, u, n))
        if (window.contains(v)) closed(static_cast<Eigen::Index>(window.index_of(v))) = c;
      adjoint_diff = std::max(adjoint_diff, (y - closed).cwiseAbs().maxCoeff());
    }
    ++checked;
  }
  const std::size_t cokernel = cokernel_dimension(m, r.rank_tol);
  const auto corank = window_corank(s, window, r.rank_tol);
  if (r.json) {
    emit("{\"dimension\":" + std::to_string(window.size()) + ",\"checked\":" + std::to_string(checked) +
         ",\"power_diff\":" + fmt(power_diff) + ",\"adjoint_power_diff\":" + fmt(adjoint_diff) +
         ",\"cokernel\":" + std::to_string(cokernel) + ",\"corank_adjusted\":" + std::to_string(corank.adjusted) + "}");
    return 0;
  }
  emit("window dimension: " + std::to_string(window.size()));
  emit("vertices checked: " + std::to_string(checked));
  emit("max |S^n - closed|: " + fmt(power_diff));
  emit("max |S*^n - closed|: " + fmt(adjoint_diff));
  emit("cokernel dimension: " + std::to_string(cokernel) + " (boundary adjusted " + std::to_string(corank.adjusted) +
       ")");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted shifts on directed trees"};
  app.require_subcommand(1);
  Request req;

  auto add_common = [&](CLI::App* sub, bool weights) {
    sub->add_option("--tree", req.tree_path, "Tree spec (JSON)");
    if (weights) sub->add_option("--weights", req.weights_path, "Weight spec (JSON)");
    sub->add_option("--levels", req.levels, "Window levels a:b");
    sub->add_option("--breadth", req.breadth, "Vertices per window level")->check(CLI::PositiveNumber);
    sub->add_option("--tol", req.tol, "Convergence tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--zero-th", req.zero_th, "Threshold for alpha = 0")->check(CLI::PositiveNumber);
    sub->add_option("--rank-tol", req.rank_tol, "Relative pivot threshold")->check(CLI::PositiveNumber);
    sub->add_option("--depth", req.depth, "Iteration depth cap")->check(CLI::PositiveNumber);
    sub->add_flag("--json", req.json, "Emit JSON lines");
  };

  auto* validate = app.add_subcommand("validate", "Check a tree spec");
  add_common(validate, false);
  auto* analyze = app.add_subcommand("analyze", "Norm, asymptotic limits and classification");
  add_common(analyze, true);
  auto* asymptote = app.add_subcommand("asymptote", "Isometric asymptote");
  add_common(asymptote, true);
  auto* adjoint = app.add_subcommand("adjoint-asymptote", "Isometric asymptote of the adjoint");
  add_common(adjoint, true);
  auto* cyclic = app.add_subcommand("cyclic", "Cyclicity verdict, or a cyclic vector for a backward shift");
  add_common(cyclic, true);
  cyclic->add_option("--backward", req.backward_path, "Backward shift spec (JSON)");
  cyclic->add_option("--length", req.length, "Number of schedule terms");
  cyclic->add_option("--window", req.window_k, "Window size K per branch");
  auto* similarity = app.add_subcommand("similarity", "Similarity witness on comb and tilde trees");
  add_common(similarity, true);
  auto* oracle = app.add_subcommand("oracle", "Compare closed forms with the dense truncation");
  add_common(oracle, true);
  oracle->add_option("--power", req.power, "Largest power checked");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(req);
    if (analyze->parsed()) return cmd_analyze(req);
    if (asymptote->parsed()) return cmd_asymptote(req);
    if (adjoint->parsed()) return cmd_adjoint_asymptote(req);
    if (cyclic->parsed()) return cmd_cyclic(req);
    if (similarity->parsed()) return cmd_similarity(req);
    if (oracle->parsed()) return cmd_oracle(req);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return exit_code(e.code());
  }
  return 0;
}
