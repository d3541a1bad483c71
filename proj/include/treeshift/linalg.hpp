#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace treeshift {

inline constexpr double kDefaultRankTol = 1e-8;

/// Rank by Gaussian elimination with partial pivoting. A column counts as
/// dependent when its best remaining pivot is at most rank_tol times the
/// column's original max-norm, so columns of very different scale are
/// judged on their own.
std::size_t numerical_rank(const Eigen::MatrixXd& a, double rank_tol = kDefaultRankTol);
/// Indices of the columns kept as independent by `numerical_rank`.
std::vector<Eigen::Index> independent_columns(const Eigen::MatrixXd& a, double rank_tol = kDefaultRankTol);

/// [x, Mx, ..., M^{count-1} x]; count defaults to the dimension.
Eigen::MatrixXd krylov_matrix(const Eigen::MatrixXd& m, const Eigen::VectorXd& x, Eigen::Index count = -1);

/// Numerical rank of the Krylov matrix. Throws DimensionCap when the
/// dimension exceeds `cap`, ShapeMismatch for non-square input.
std::size_t krylov_rank(const Eigen::MatrixXd& m, const Eigen::VectorXd& x, double rank_tol = kDefaultRankTol,
                        std::size_t cap = 4096);

/// d - rank(M).
std::size_t cokernel_dimension(const Eigen::MatrixXd& m, double rank_tol = kDefaultRankTol, std::size_t cap = 4096);

/// Orthonormal basis of the span of the independent columns of `a`.
Eigen::MatrixXd orthonormal_span(const Eigen::MatrixXd& a, double rank_tol = kDefaultRankTol);

/// max_i ||e_i - Q Q^T e_i|| for an orthonormal Q.
double max_projection_residual(const Eigen::MatrixXd& q);

}  // namespace treeshift
