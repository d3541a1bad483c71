#include "treeshift/linalg.hpp"

#include <cmath>
#include <string>

#include "treeshift/error.hpp"

namespace treeshift {

std::vector<Eigen::Index> independent_columns(const Eigen::MatrixXd& a, double rank_tol) {
  Eigen::MatrixXd w = a;
  const Eigen::Index rows = w.rows();
  const Eigen::Index cols = w.cols();
  std::vector<Eigen::Index> kept;
  Eigen::Index r = 0;
  for (Eigen::Index j = 0; j < cols && r < rows; ++j) {
    const double scale = a.col(j).cwiseAbs().maxCoeff();
    if (scale == 0.0) continue;
    Eigen::Index p = 0;
    const double pivot = w.col(j).segment(r, rows - r).cwiseAbs().maxCoeff(&p);
    p += r;
    if (pivot <= rank_tol * scale) continue;
    if (p != r) w.row(p).swap(w.row(r));
    for (Eigen::Index i = r + 1; i < rows; ++i) {
      const double f = w(i, j) / w(r, j);
      if (f != 0.0) w.row(i).segment(j, cols - j) -= f * w.row(r).segment(j, cols - j);
    }
    kept.push_back(j);
    ++r;
  }
  return kept;
}

std::size_t numerical_rank(const Eigen::MatrixXd& a, double rank_tol) {
  return independent_columns(a, rank_tol).size();
}

Eigen::MatrixXd krylov_matrix(const Eigen::MatrixXd& m, const Eigen::VectorXd& x, Eigen::Index count) {
  if (m.rows() != m.cols() || m.rows() != x.size())
    throw Error(ErrorCode::ShapeMismatch, "Krylov input must be a square matrix and a matching vector");
  if (count < 0) count = m.rows();
  Eigen::MatrixXd k(m.rows(), count);
  Eigen::VectorXd v = x;
  for (Eigen::Index i = 0; i < count; ++i) {
    k.col(i) = v;
    v = m * v;
  }
  return k;
}

std::size_t krylov_rank(const Eigen::MatrixXd& m, const Eigen::VectorXd& x, double rank_tol, std::size_t cap) {
  if (static_cast<std::size_t>(m.rows()) > cap)
    throw Error(ErrorCode::DimensionCap, std::to_string(m.rows()) + " exceeds the cap of " + std::to_string(cap));
  return numerical_rank(krylov_matrix(m, x), rank_tol);
}

std::size_t cokernel_dimension(const Eigen::MatrixXd& m, double rank_tol, std::size_t cap) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::ShapeMismatch, "cokernel dimension needs a square matrix");
  if (static_cast<std::size_t>(m.rows()) > cap)
    throw Error(ErrorCode::DimensionCap, std::to_string(m.rows()) + " exceeds the cap of " + std::to_string(cap));
  return static_cast<std::size_t>(m.rows()) - numerical_rank(m, rank_tol);
}

Eigen::MatrixXd orthonormal_span(const Eigen::MatrixXd& a, double rank_tol) {
  const auto kept = independent_columns(a, rank_tol);
  Eigen::MatrixXd sel(a.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto& c = a.col(kept[i]);
    sel.col(static_cast<Eigen::Index>(i)) = c / c.norm();
  }
  if (sel.cols() == 0) return sel;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(sel);
  return qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), sel.cols());
}

double max_projection_residual(const Eigen::MatrixXd& q) {
  const Eigen::Index d = q.rows();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::VectorXd r = -q * q.row(i).transpose();
    r(i) += 1.0;
    worst = std::max(worst, r.norm());
  }
  return worst;
}

}  // namespace treeshift
