#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "treeshift/vertex.hpp"

namespace treeshift {

/// Weight rule along a ray, as a function of the level of the weighted
/// (child) vertex.
///
/// - Constant:  lambda_m = value
/// - Geometric: lambda_m = exp(-scale * ratio^m) for m >= from, `below` otherwise
/// - ExpRay:    lambda_m = exp(-scale / (|m| + 1)^power)
///
/// The log-sums return -infinity when the product diverges to 0.
struct RayRule {
  enum class Kind { Constant, Geometric, ExpRay };
  Kind kind = Kind::Constant;
  double value = 1.0;
  double scale = 1.0;
  double ratio = 0.5;
  double power = 2.0;
  std::int64_t from = 1;
  double below = 1.0;

  static RayRule constant(double c);
  static RayRule geometric(double scale, double ratio, std::int64_t from = 1, double below = 1.0);
  static RayRule exp_ray(double scale = 1.0, double power = 2.0);

  double at(std::int64_t level) const;
  /// Sum of log(lambda_m) over lo <= m <= hi (either end may be open).
  double log_sum(std::optional<std::int64_t> lo, std::optional<std::int64_t> hi) const;
  /// Supremum of lambda_m over lo <= m <= hi (either end may be open).
  double sup(std::optional<std::int64_t> lo, std::optional<std::int64_t> hi) const;
  bool is_constant() const { return kind == Kind::Constant; }
  bool operator==(const RayRule&) const = default;
};

/// Parsed weight specification. How rules map onto vertices is decided by
/// the shift operator, which knows the tree.
struct WeightAssignment {
  enum class Kind { Map, Constant, Family };
  Kind kind = Kind::Constant;

  // Map
  std::map<VertexId, double> values;
  std::optional<double> fallback;

  // Constant / Family
  RayRule rule = RayRule::constant(1.0);
  std::optional<RayRule> primed;
  /// Binary tree: weight of the off-spine child of a spine vertex. Unset means
  /// sqrt(1 - lambda^2) of its spine sibling.
  std::optional<double> sibling;
  /// Binary tree: weight of the deeper off-spine vertices.
  double off = 0.7071067811865476;

  static WeightAssignment constant(double c);
  static WeightAssignment map(std::map<VertexId, double> values, std::optional<double> fallback = std::nullopt);
  static WeightAssignment family(RayRule rule, std::optional<RayRule> primed = std::nullopt);

  const RayRule& primed_rule() const { return primed ? *primed : rule; }
};

}  // namespace treeshift
