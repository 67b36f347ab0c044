#pragma once

#include <Eigen/Dense>

namespace kcblb {

/// Solves (M + jitter I) X = rhs by Cholesky. When the factorization fails
/// the jitter is raised tenfold (starting from 1e-12 * mean diagonal when
/// jitter is zero) up to 1e-4 * trace(M) / m; past that, throws
/// Error(NotPositiveDefinite).
Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& M, const Eigen::MatrixXd& rhs,
                          double jitter = 0.0);

/// Largest and smallest eigenvalue of a symmetric matrix.
struct EigenRange {
  double smallest;
  double largest;
};
EigenRange symmetric_eigen_range(const Eigen::MatrixXd& M);

}  // namespace kcblb
