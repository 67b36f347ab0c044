#include "kcblb/krr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kcblb/error.hpp"
#include "kcblb/linalg.hpp"

namespace kcblb {

Eigen::VectorXd krr_coefficients(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                                 double ridge) {
  if (K.rows() != y.size()) throw Error(ErrorCode::DimensionMismatch, "krr: K and y differ");
  if (!(ridge > 0.0)) throw Error(ErrorCode::InvalidArgument, "krr: ridge must be positive");
  return spd_solve(K, y, ridge);
}

std::vector<double> krr_gcv_scores(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                                   std::span<const double> grid, bool intercept) {
  const auto n = static_cast<double>(y.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  const Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0);
  const Eigen::VectorXd yt = es.eigenvectors().transpose() * y;
  const Eigen::VectorXd ut = es.eigenvectors().transpose() * Eigen::VectorXd::Ones(y.size());

  std::vector<double> scores;
  scores.reserve(grid.size());
  for (double lambda : grid) {
    const Eigen::ArrayXd inv = (d.array() + lambda).inverse();
    double mu = 0.0;
    double trace = (d.array() * inv).sum();
    if (intercept) {
      const double uhu = (ut.array().square() * inv).sum();
      mu = (ut.array() * yt.array() * inv).sum() / uhu;
      trace += 1.0 - (ut.array().square() * d.array() * inv.square()).sum() / uhu;
    }
    // Residual y - S y = lambda * H (y - mu 1).
    const double rss =
        lambda * lambda * ((yt.array() - mu * ut.array()).square() * inv.square()).sum();
    const double denom = n - trace;
    scores.push_back(denom > 0.0 ? n * rss / (denom * denom)
                                 : std::numeric_limits<double>::infinity());
  }
  return scores;
}

std::vector<double> default_ridge_grid(const Eigen::MatrixXd& K) {
  const double scale = std::max(K.trace() / static_cast<double>(std::max<Eigen::Index>(1, K.rows())), 1e-12);
  std::vector<double> grid;
  for (int e = -4; e <= 3; ++e) grid.push_back(scale * std::pow(10.0, e));
  return grid;
}

KernelRidge KernelRidge::fit(const KernelSpec& spec, const Eigen::MatrixXd& X,
                             const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double ridge,
                             bool intercept) {
  if (X.rows() != y.size() || K.rows() != y.size())
    throw Error(ErrorCode::DimensionMismatch, "KernelRidge: sizes differ");
  if (y.size() == 0) throw Error(ErrorCode::InvalidArgument, "KernelRidge: no training rows");
  if (!(ridge > 0.0)) throw Error(ErrorCode::InvalidArgument, "KernelRidge: ridge must be positive");
  KernelRidge out;
  out.spec_ = spec;
  out.train_ = X;
  out.ridge_ = ridge;
  if (intercept) {
    Eigen::MatrixXd rhs(y.size(), 2);
    rhs.col(0) = y;
    rhs.col(1).setOnes();
    const Eigen::MatrixXd sol = spd_solve(K, rhs, ridge);
    out.mu_ = sol.col(0).sum() / sol.col(1).sum();
    out.alpha_ = sol.col(0) - out.mu_ * sol.col(1);
  } else {
    out.alpha_ = spd_solve(K, y, ridge);
  }
  out.fitted_ = (K * out.alpha_).array() + out.mu_;
  return out;
}

KernelRidge KernelRidge::fit_gcv(const KernelSpec& spec, const Eigen::MatrixXd& X,
                                 const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                                 bool intercept) {
  const auto grid = default_ridge_grid(K);
  const auto scores = krr_gcv_scores(K, y, grid, intercept);
  const auto best = std::min_element(scores.begin(), scores.end()) - scores.begin();
  return fit(spec, X, K, y, grid[static_cast<std::size_t>(best)], intercept);
}

Eigen::VectorXd KernelRidge::predict(const Eigen::MatrixXd& Xnew) const {
  Eigen::VectorXd out = gram_cross(spec_, Xnew, train_) * alpha_;
  out.array() += mu_;
  return out;
}

}  // namespace kcblb
