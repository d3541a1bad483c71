#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "treeshift/asymptote.hpp"
#include "treeshift/cyclicity.hpp"
#include "treeshift/error.hpp"
#include "treeshift/io.hpp"
#include "treeshift/linalg.hpp"
#include "treeshift/similarity.hpp"

namespace py = pybind11;
using namespace treeshift;

namespace {

// Every entry point takes JSON documents and returns JSON text; the Python
// package decodes it.
struct Model {
  ShiftOperator s;
  TreeWindow window;
};

Model load(const std::string& tree, const std::string& weights, std::int64_t lo, std::int64_t hi, std::size_t breadth) {
  ShiftOperator s(io::parse_tree(tree), io::parse_weights(weights));
  auto window = s.tree().kind() == TreeKind::Finite ? TreeWindow::standard(s.tree_ptr())
                                                     : TreeWindow(s.tree_ptr(), lo, hi, breadth);
  return {std::move(s), std::move(window)};
}

std::string join(const std::vector<std::string>& lines) {
  std::string out = "[";
  for (std::size_t i = 0; i < lines.size(); ++i) out += (i ? "," : "") + lines[i];
  return out + "]";
}

std::string validate_tree(const std::string& tree) {
  auto t = io::parse_tree(tree);
  auto br = t->symbolic_branching();
  std::string out = "{\"family\":\"" + t->family() + "\",\"rooted\":" + (t->is_rooted() ? "true" : "false");
  if (br) out += ",\"branching\":\"" + br->to_string() + "\"";
  return out + "}";
}

std::string analyze(const std::string& tree, const std::string& weights, std::int64_t lo, std::int64_t hi,
                    std::size_t breadth) {
  auto m = load(tree, weights, lo, hi, breadth);
  const auto norm = operator_norm(m.s, m.window);
  auto alpha = alpha_profile(m.s, m.window);
  auto adjoint = adjoint_profile(m.s, m.window);
  auto cls = classify(m.s, alpha, adjoint);
  return "{\"norm\":" + std::to_string(norm.value) + ",\"classification\":" + io::to_json(cls) +
         ",\"alpha\":" + join(io::to_json_lines(alpha)) + ",\"adjoint\":" + join(io::to_json_lines(adjoint)) +
         ",\"verdict\":" + io::to_json(cyclicity_verdict(m.s, cls)) + "}";
}

std::string asymptote(const std::string& tree, const std::string& weights, std::int64_t lo, std::int64_t hi,
                      std::size_t breadth) {
  auto m = load(tree, weights, lo, hi, breadth);
  auto alpha = alpha_profile(m.s, m.window);
  auto stable = stable_subtree(m.s, m.window, alpha);
  return io::to_json(isometric_asymptote(m.s, m.window, alpha, stable));
}

std::string backward_cyclic(const std::string& spec_text, std::size_t length, std::int64_t window_k) {
  const auto spec = io::parse_backward(spec_text);
  if (spec.zero_weights().size() == 1) {
    auto split = construct_with_nilpotent(spec, length, window_k);
    return "{\"candidate\":" + join(io::to_json_lines(split.positive_part)) + ",\"verification\":" +
           io::to_json(verify_cyclic_candidate(spec, split.f, split.top, window_k)) + "}";
  }
  auto c = construct_backward_cyclic(spec, length);
  return "{\"candidate\":" + join(io::to_json_lines(c)) + ",\"verification\":" +
         io::to_json(verify_cyclic_candidate(spec, c, window_k)) + "}";
}

std::string similarity(const std::string& tree, const std::string& weights, std::int64_t levels) {
  ShiftOperator s(io::parse_tree(tree), io::parse_weights(weights));
  const auto& leaves = s.tree().symbolic_leaves();
  const bool leaf = leaves && !leaves->empty();
  return io::to_json(leaf ? build_leaf_similarity(s, levels) : build_tilde_quasiaffinity(s, levels));
}

std::string ratio(const std::string& tree, const std::string& weights, std::int64_t horizon) {
  ShiftOperator s(io::parse_tree(tree), io::parse_weights(weights));
  return io::to_json(ratio_bounded(s, horizon));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Weighted shifts on directed trees";

  py::register_exception<Error>(m, "TreeShiftError", PyExc_RuntimeError);

  m.def("validate_tree", &validate_tree, py::arg("tree"));
  m.def("analyze", &analyze, py::arg("tree"), py::arg("weights"), py::arg("lo") = -4, py::arg("hi") = 4,
        py::arg("breadth") = 16);
  m.def("asymptote", &asymptote, py::arg("tree"), py::arg("weights"), py::arg("lo") = -4, py::arg("hi") = 4,
        py::arg("breadth") = 16);
  m.def("backward_cyclic", &backward_cyclic, py::arg("spec"), py::arg("length") = 16, py::arg("window") = 50);
  m.def("similarity", &similarity, py::arg("tree"), py::arg("weights"), py::arg("levels") = 12);
  m.def("ratio_bounded", &ratio, py::arg("tree"), py::arg("weights"), py::arg("horizon") = 200);
  m.def(
      "krylov_rank",
      [](const Eigen::MatrixXd& a, const Eigen::VectorXd& x, double tol) { return krylov_rank(a, x, tol); },
      py::arg("matrix"), py::arg("x"), py::arg("rank_tol") = kDefaultRankTol);
  m.def(
      "numerical_rank", [](const Eigen::MatrixXd& a, double tol) { return numerical_rank(a, tol); }, py::arg("matrix"),
      py::arg("rank_tol") = kDefaultRankTol);
}
