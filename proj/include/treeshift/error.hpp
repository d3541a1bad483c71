#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace treeshift {

enum class ErrorCode {
  InvalidSpec,
  DisconnectedGraph,
  MultipleParents,
  CircuitFound,
  RootMismatch,
  VertexNotFound,
  UnknownVertex,
  WindowTooLarge,
  NotAContraction,
  StructuralViolation,
  StableSubtreeEmpty,
  AdjointStable,
  ZeroWeight,
  ScheduleTooShort,
  DimensionCap,
  ShapeMismatch,
  ComputationBudget,
};

std::string_view error_name(ErrorCode code);

/// Single exception type for the library. `code()` selects the failure
/// class, `what()` carries the name followed by the details.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace treeshift
