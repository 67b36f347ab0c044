#include "kcblb/linalg.hpp"

#include <cmath>
#include <string>

#include "kcblb/error.hpp"

namespace kcblb {

Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& M, const Eigen::MatrixXd& rhs,
                          double jitter) {
  const auto m = M.rows();
  if (M.cols() != m || rhs.rows() != m)
    throw Error(ErrorCode::DimensionMismatch, "spd_solve: shape mismatch");
  if (!(jitter >= 0.0)) throw Error(ErrorCode::InvalidArgument, "spd_solve: negative jitter");
  if (m == 0) return Eigen::MatrixXd(0, rhs.cols());

  const double mean_diag = M.trace() / static_cast<double>(m);
  const double cap = 1e-4 * std::abs(mean_diag);
  Eigen::MatrixXd A = M;
  double applied = 0.0;
  double next = jitter;
  for (;;) {
    A.diagonal().array() += next - applied;
    applied = next;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd X = llt.solve(rhs);
      if (X.allFinite()) return X;
    }
    next = applied > 0.0 ? applied * 10.0 : 1e-12 * std::abs(mean_diag);
    if (next <= 0.0 || next > cap || (applied >= cap && applied > 0.0)) break;
  }
  throw Error(ErrorCode::NotPositiveDefinite,
              "spd_solve: Cholesky failed with jitter up to " + std::to_string(applied));
}

EigenRange symmetric_eigen_range(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

}  // namespace kcblb
