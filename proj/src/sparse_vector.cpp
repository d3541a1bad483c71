#include "treeshift/sparse_vector.hpp"

#include <cmath>
#include <sstream>

namespace treeshift {

SparseVector SparseVector::basis(const VertexId& v, double c) {
  SparseVector x;
  x.set(v, c);
  return x;
}

double SparseVector::operator[](const VertexId& v) const {
  auto it = coeffs_.find(v);
  return it == coeffs_.end() ? 0.0 : it->second;
}

void SparseVector::add(const VertexId& v, double c) {
  if (c == 0.0) return;
  auto [it, inserted] = coeffs_.emplace(v, c);
  if (inserted) return;
  it->second += c;
  if (it->second == 0.0) coeffs_.erase(it);
}

void SparseVector::set(const VertexId& v, double c) {
  if (c == 0.0) {
    coeffs_.erase(v);
  } else {
    coeffs_[v] = c;
  }
}

SparseVector& SparseVector::axpy(double a, const SparseVector& x) {
  for (const auto& [v, c] : x.coeffs_) add(v, a * c);
  return *this;
}

SparseVector& SparseVector::scale(double a) {
  if (a == 0.0) {
    coeffs_.clear();
    return *this;
  }
  for (auto it = coeffs_.begin(); it != coeffs_.end();) {
    it->second *= a;
    it = it->second == 0.0 ? coeffs_.erase(it) : std::next(it);
  }
  return *this;
}

double SparseVector::norm_squared() const {
  double s = 0.0;
  for (const auto& [v, c] : coeffs_) s += c * c;
  return s;
}

double SparseVector::norm() const { return std::sqrt(norm_squared()); }

double SparseVector::dot(const SparseVector& other) const {
  const auto& small = size() <= other.size() ? coeffs_ : other.coeffs_;
  const auto& large = size() <= other.size() ? other.coeffs_ : coeffs_;
  double s = 0.0;
  for (const auto& [v, c] : small) {
    auto it = large.find(v);
    if (it != large.end()) s += c * it->second;
  }
  return s;
}

double SparseVector::max_abs_diff(const SparseVector& other) const {
  double m = 0.0;
  for (const auto& [v, c] : coeffs_) m = std::max(m, std::abs(c - other[v]));
  for (const auto& [v, c] : other.coeffs_)
    if (!coeffs_.count(v)) m = std::max(m, std::abs(c));
  return m;
}

std::string SparseVector::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << '{';
  bool first = true;
  for (const auto& [v, c] : coeffs_) {
    if (!first) os << ", ";
    first = false;
    os << v << ": " << c;
  }
  os << '}';
  return os.str();
}

SparseVector operator+(SparseVector a, const SparseVector& b) { return a.axpy(1.0, b); }
SparseVector operator-(SparseVector a, const SparseVector& b) { return a.axpy(-1.0, b); }
SparseVector operator*(double s, SparseVector a) { return a.scale(s); }

}  // namespace treeshift
