#pragma once

#include <map>
#include <string>
#include <utility>

#include "treeshift/vertex.hpp"

namespace treeshift {

/// Finitely supported real vector indexed by vertices. Zero coefficients are
/// never stored.
class SparseVector {
 public:
  using Map = std::map<VertexId, double>;

  SparseVector() = default;
  static SparseVector basis(const VertexId& v, double c = 1.0);

  double operator[](const VertexId& v) const;
  /// Adds c to the coefficient of v, dropping it if the result is zero.
  void add(const VertexId& v, double c);
  void set(const VertexId& v, double c);
  SparseVector& axpy(double a, const SparseVector& x);
  SparseVector& scale(double a);

  double norm_squared() const;
  double norm() const;
  double dot(const SparseVector& other) const;
  /// Largest absolute coefficient of (*this - other).
  double max_abs_diff(const SparseVector& other) const;

  bool empty() const { return coeffs_.empty(); }
  std::size_t size() const { return coeffs_.size(); }
  const Map& coefficients() const { return coeffs_; }
  Map::const_iterator begin() const { return coeffs_.begin(); }
  Map::const_iterator end() const { return coeffs_.end(); }

  std::string to_string() const;

 private:
  Map coeffs_;
};

SparseVector operator+(SparseVector a, const SparseVector& b);
SparseVector operator-(SparseVector a, const SparseVector& b);
SparseVector operator*(double s, SparseVector a);

}  // namespace treeshift
