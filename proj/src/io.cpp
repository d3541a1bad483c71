#include "treeshift/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "treeshift/error.hpp"

namespace treeshift::io {

using nlohmann::json;

namespace {

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, std::string("malformed JSON: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidSpec, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

template <class T>
T field(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidSpec, std::string("bad value for '") + key + "'");
  }
}

template <class T>
std::optional<T> optional_field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return field<T>(j, key, T{});
}

VertexId vertex_of(const json& j) {
  if (j.is_string()) return VertexId(j.get<std::string>());
  if (j.is_number_integer()) return VertexId::integer(j.get<long long>());
  throw Error(ErrorCode::InvalidSpec, "vertex names must be strings or integers");
}

RayRule parse_rule(const json& j) {
  if (j.is_number()) return RayRule::constant(j.get<double>());
  const auto name = field<std::string>(j, "name", "");
  const json params = j.contains("params") ? j.at("params") : json::object();
  if (name == "constant") return RayRule::constant(field<double>(params, "value", field<double>(j, "value", 1.0)));
  if (name == "geometric")
    return RayRule::geometric(field<double>(params, "scale", 1.0), field<double>(params, "ratio", 0.5),
                              field<std::int64_t>(params, "from", 1), field<double>(params, "below", 1.0));
  if (name == "exp-ray") return RayRule::exp_ray(field<double>(params, "scale", 1.0), field<double>(params, "power", 2.0));
  throw Error(ErrorCode::InvalidSpec, "unknown weight family '" + name + "'");
}

json number_or_inf(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : "-inf";
}

json branching_json(const BranchingCount& b) {
  if (b.infinite) return "inf";
  return b.value;
}

std::string dump(const json& j) { return j.dump(); }

}  // namespace

TreePtr parse_tree(const std::string& text) {
  const json doc = parse_document(text);
  if (!doc.is_object()) throw Error(ErrorCode::InvalidSpec, "tree spec must be a JSON object");

  if (doc.contains("family")) {
    const auto family = field<std::string>(doc, "family", "");
    const json params = doc.contains("params") ? doc.at("params") : json::object();
    if (family == "rooted-path") return make_rooted_path(optional_field<std::int64_t>(params, "length"));
    if (family == "bilateral-path") return make_bilateral_path(optional_field<std::int64_t>(params, "leaf"));
    if (family == "rootless-binary") return make_rootless_binary();
    if (family == "tilde") return make_tilde(field<bool>(params, "rooted", false));
    if (family == "comb")
      return make_comb(optional_field<std::int64_t>(params, "primed_leaf"),
                       optional_field<std::int64_t>(params, "unprimed_leaf"));
    throw Error(ErrorCode::InvalidSpec, "unknown tree family '" + family + "'");
  }

  if (!doc.contains("vertices") || !doc.at("vertices").is_array())
    throw Error(ErrorCode::InvalidSpec, "tree spec needs \"vertices\" or \"family\"");
  std::vector<VertexId> vertices;
  for (const auto& v : doc.at("vertices")) vertices.push_back(vertex_of(v));
  std::vector<std::pair<VertexId, VertexId>> edges;
  if (doc.contains("edges")) {
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw Error(ErrorCode::InvalidSpec, "edges are [parent, child] pairs");
      edges.emplace_back(vertex_of(e[0]), vertex_of(e[1]));
    }
  }
  std::optional<VertexId> root;
  if (doc.contains("root") && !doc.at("root").is_null()) root = vertex_of(doc.at("root"));
  return validate_finite(vertices, edges, root);
}

TreePtr load_tree(const std::string& path) { return parse_tree(read_file(path)); }

WeightAssignment parse_weights(const std::string& text) {
  const json doc = parse_document(text);
  const auto kind = field<std::string>(doc, "kind", "");
  if (kind == "constant") return WeightAssignment::constant(field<double>(doc, "value", 1.0));
  if (kind == "map") {
    std::map<VertexId, double> values;
    if (doc.contains("values")) {
      if (!doc.at("values").is_object()) throw Error(ErrorCode::InvalidSpec, "\"values\" must be an object");
      for (const auto& [k, v] : doc.at("values").items()) {
        if (!v.is_number()) throw Error(ErrorCode::InvalidSpec, "weight of '" + k + "' is not a number");
        values.emplace(VertexId(k), v.get<double>());
      }
    }
    return WeightAssignment::map(std::move(values), optional_field<double>(doc, "default"));
  }
  if (kind == "family") {
    auto w = WeightAssignment::family(parse_rule(doc));
    if (doc.contains("primed")) w.primed = parse_rule(doc.at("primed"));
    w.sibling = optional_field<double>(doc, "sibling");
    w.off = field<double>(doc, "off", w.off);
    return w;
  }
  throw Error(ErrorCode::InvalidSpec, "weight kind must be map, constant or family");
}

WeightAssignment load_weights(const std::string& path) { return parse_weights(read_file(path)); }

BackwardShiftSpec parse_backward(const std::string& text) {
  const json doc = parse_document(text);
  BackwardShiftSpec spec;
  try {
    spec.weights = doc.at("branches").get<std::vector<std::vector<double>>>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidSpec, "backward spec needs \"branches\": a list of weight lists");
  }
  spec.tail = field<double>(doc, "tail", 1.0);
  spec.validate();
  return spec;
}

BackwardShiftSpec load_backward(const std::string& path) { return parse_backward(read_file(path)); }

std::string to_json(const ProfileEntry& e) {
  json j{{"vertex", e.vertex.str()},
         {"level", e.level},
         {"estimate", number_or_inf(e.estimate)},
         {"upper", number_or_inf(e.upper)},
         {"status", status_name(e.status)},
         {"depth", e.depth},
         {"certified", e.certified}};
  return dump(j);
}

std::vector<std::string> to_json_lines(const AsymptoticProfile& p) {
  std::vector<std::string> out;
  for (const auto& e : p.entries) out.push_back(to_json(e));
  return out;
}

std::vector<std::string> to_json_lines(const AdjointProfile& p) {
  std::vector<std::string> out;
  for (const auto& e : p.levels) out.push_back(to_json(e));
  return out;
}

std::string to_json(const Classification& c) {
  return dump({{"forward", class_name(c.forward)},
               {"forward_certified", c.forward_certified},
               {"adjoint", class_name(c.adjoint)},
               {"adjoint_certified", c.adjoint_certified},
               {"summary", c.summary()},
               {"notes", c.notes}});
}

std::string to_json(const StableSubtree& t) {
  std::vector<std::string> members;
  for (const auto& v : t.members) members.push_back(v.str());
  return dump({{"stable_subtree", members}, {"branching", branching_json(t.branching)}, {"exact", t.branching.exact}});
}

std::string to_json(const AsymptoteDescriptor& d) {
  json beta = json::object();
  for (const auto& [v, b] : d.beta) beta[v.str()] = b;
  std::vector<std::string> unavailable;
  for (const auto& v : d.unavailable) unavailable.push_back(v.str());
  return dump({{"beta", beta},
               {"class", asymptote_name(d.type)},
               {"multiplicity", branching_json(d.multiplicity)},
               {"cnu_test", d.cnu.value},
               {"unavailable", unavailable}});
}

std::string to_json(const AdjointAsymptoteDescriptor& d) {
  json coeffs = json::object();
  for (const auto& [lvl, c] : d.coefficients) coeffs[std::to_string(lvl)] = c;
  json j{{"class", adjoint_shift_name(d.type)}, {"coefficients", coeffs}};
  j["last_level"] = d.last_level ? json(*d.last_level) : json(nullptr);
  return dump(j);
}

std::string to_json(const Verdict& v) {
  json j{{"verdict", verdict_name(v.kind)}, {"rule", v.rule}, {"anchors", v.anchors}, {"reason", v.reason}};
  if (!v.blockers.empty()) j["blockers"] = v.blockers;
  return dump(j);
}

std::vector<std::string> to_json_lines(const CyclicCandidate& c) {
  std::vector<std::string> out;
  for (std::size_t l = 0; l < c.length(); ++l)
    out.push_back(dump({{"l", l + 1}, {"branch", c.branch[l]}, {"position", c.position[l]}, {"xi", c.xi[l]}}));
  for (const auto& r : c.log) out.push_back(dump({{"rescaled_after", r.m}, {"sigma", r.sigma}, {"factor", r.factor}}));
  return out;
}

std::string to_json(const CyclicVerification& v) {
  return dump({{"dimension", v.dimension},
               {"rank", v.rank},
               {"residual", v.residual},
               {"orbit_length", v.orbit_length},
               {"cyclic", v.cyclic()}});
}

std::string to_json(const RatioCertificate& r) {
  json j{{"kind", ratio_kind_name(r.kind)}, {"sup", number_or_inf(r.sup)}, {"certified", r.certified},
         {"reason", r.reason}};
  if (r.kind == RatioKind::Bounded) j["bound"] = number_or_inf(r.bound);
  if (r.kind == RatioKind::UnboundedEvidence) {
    j["k"] = r.k;
    j["value"] = number_or_inf(r.value);
  }
  return dump(j);
}

std::string to_json(const SimilarityWitness& w) {
  json blocks = json::array();
  for (const auto& b : w.blocks)
    blocks.push_back({{"k", b.k}, {"determinant", b.determinant}, {"inverse_bound", b.inverse_bound}});
  json target = json::object();
  for (const auto& [v, wt] : w.target_weights) target[v.str()] = wt;
  json j{{"target", w.target == SimilarityTarget::LeafSum ? "two-ray+nilpotent" : "two-ray"},
         {"target_weights", target},
         {"residual", w.residual},
         {"mode", witness_mode_name(w.mode)},
         {"blocks", blocks},
         {"condition_estimate", number_or_inf(w.condition_estimate)},
         {"window_rank", w.window_rank},
         {"window_size", w.window.size()},
         {"ratio", json::parse(to_json(w.ratio))}};
  j["inverse_bound"] = w.inverse_bound ? json(*w.inverse_bound) : json(nullptr);
  return dump(j);
}

}  // namespace treeshift::io
