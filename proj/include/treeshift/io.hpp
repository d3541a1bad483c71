#pragma once

#include <string>
#include <vector>

#include "treeshift/asymptote.hpp"
#include "treeshift/cyclicity.hpp"
#include "treeshift/similarity.hpp"
#include "treeshift/tree.hpp"
#include "treeshift/weights.hpp"

namespace treeshift::io {

// Parsing. Malformed documents raise InvalidSpec; structural problems in
// finite trees raise the tree validation errors.

/// `{"vertices":[...],"edges":[["u","v"],...],"root":"r"}` or
/// `{"family":"tilde","params":{...}}`.
TreePtr parse_tree(const std::string& text);
TreePtr load_tree(const std::string& path);

/// `{"kind":"map","values":{...},"default":x}`, `{"kind":"constant","value":x}`
/// or `{"kind":"family","name":"geometric"|"exp-ray","params":{...}}`.
WeightAssignment parse_weights(const std::string& text);
WeightAssignment load_weights(const std::string& path);

/// `{"branches":[[w_00,w_01,...],...],"tail":1}`.
BackwardShiftSpec parse_backward(const std::string& text);
BackwardShiftSpec load_backward(const std::string& path);

// Serialization. Each function returns one compact JSON record; the
// vector-valued ones are JSON-lines.

std::string to_json(const ProfileEntry& e);
std::vector<std::string> to_json_lines(const AsymptoticProfile& p);
std::vector<std::string> to_json_lines(const AdjointProfile& p);
std::string to_json(const Classification& c);
std::string to_json(const StableSubtree& t);
std::string to_json(const AsymptoteDescriptor& d);
std::string to_json(const AdjointAsymptoteDescriptor& d);
std::string to_json(const Verdict& v);
std::vector<std::string> to_json_lines(const CyclicCandidate& c);
std::string to_json(const CyclicVerification& v);
std::string to_json(const SimilarityWitness& w);
std::string to_json(const RatioCertificate& r);

}  // namespace treeshift::io
