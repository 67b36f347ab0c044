#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kcblb/kernels.hpp"

namespace kcblb {

/// Coefficients alpha solving (K + ridge I) alpha = y.
Eigen::VectorXd krr_coefficients(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                                 double ridge);

/// Generalized cross-validation score n |y - S y|^2 / (n - tr S)^2 of kernel
/// ridge regression with hat matrix S, for every ridge in `grid`. With
/// `intercept` the constant is fitted unpenalized.
std::vector<double> krr_gcv_scores(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                                   std::span<const double> grid, bool intercept);

/// Ridge grid scaled to the Gram diagonal: mean_diag(K) * 10^{-4..3}.
std::vector<double> default_ridge_grid(const Eigen::MatrixXd& K);

/// Kernel ridge regression g(x) = mu + sum_j alpha_j k(x, x_j).
class KernelRidge {
 public:
  KernelRidge() = default;

  /// Fits on training rows X with Gram matrix K = gram(spec, X).
  static KernelRidge fit(const KernelSpec& spec, const Eigen::MatrixXd& X,
                         const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double ridge,
                         bool intercept);

  /// Same, with the ridge chosen by GCV over default_ridge_grid(K).
  static KernelRidge fit_gcv(const KernelSpec& spec, const Eigen::MatrixXd& X,
                             const Eigen::MatrixXd& K, const Eigen::VectorXd& y, bool intercept);

  /// Predictions at the training rows.
  const Eigen::VectorXd& fitted() const { return fitted_; }
  Eigen::VectorXd predict(const Eigen::MatrixXd& Xnew) const;

  const Eigen::VectorXd& coefficients() const { return alpha_; }
  double intercept() const { return mu_; }
  double ridge() const { return ridge_; }

 private:
  KernelSpec spec_;
  Eigen::MatrixXd train_;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd fitted_;
  double mu_ = 0.0;
  double ridge_ = 0.0;
};

}  // namespace kcblb
