#include "treeshift/vertex.hpp"

#include "treeshift/error.hpp"

namespace treeshift {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::MultipleParents: return "MultipleParents";
    case ErrorCode::CircuitFound: return "CircuitFound";
    case ErrorCode::RootMismatch: return "RootMismatch";
    case ErrorCode::VertexNotFound: return "VertexNotFound";
    case ErrorCode::UnknownVertex: return "UnknownVertex";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::NotAContraction: return "NotAContraction";
    case ErrorCode::StructuralViolation: return "StructuralViolation";
    case ErrorCode::StableSubtreeEmpty: return "StableSubtreeEmpty";
    case ErrorCode::AdjointStable: return "AdjointStable";
    case ErrorCode::ZeroWeight: return "ZeroWeight";
    case ErrorCode::ScheduleTooShort: return "ScheduleTooShort";
    case ErrorCode::DimensionCap: return "DimensionCap";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ComputationBudget: return "ComputationBudget";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(error_name(code)) + (detail.empty() ? "" : ": " + detail)),
      code_(code),
      detail_(detail) {}

std::vector<VertexId> to_vector(const VertexSet& set) { return {set.begin(), set.end()}; }

}  // namespace treeshift
