#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace treeshift {

/// Opaque vertex identifier.
///
/// Finite trees use the names from their spec file. Procedural families use
/// structured tokens: `n` for integer spine vertices, `k'` for the primed ray
/// and `l:1bbb` for off-spine vertices of the rootless binary tree (branching
/// off the spine vertex at level l, then following the bit path).
class VertexId {
 public:
  VertexId() = default;
  explicit VertexId(std::string token) : token_(std::move(token)) {}
  explicit VertexId(const char* token) : token_(token) {}

  static VertexId parse(std::string_view text) { return VertexId(std::string(text)); }
  static VertexId integer(long long n) { return VertexId(std::to_string(n)); }
  static VertexId primed(long long k) { return VertexId(std::to_string(k) + "'"); }

  const std::string& str() const noexcept { return token_; }
  bool empty() const noexcept { return token_.empty(); }

  auto operator<=>(const VertexId&) const = default;
  bool operator==(const VertexId&) const = default;

 private:
  std::string token_;
};

inline std::ostream& operator<<(std::ostream& os, const VertexId& v) { return os << v.str(); }

struct VertexIdHash {
  std::size_t operator()(const VertexId& v) const noexcept {
    return std::hash<std::string>{}(v.str());
  }
};

using VertexSet = std::set<VertexId>;

std::vector<VertexId> to_vector(const VertexSet& set);

}  // namespace treeshift
