#pragma once

#include <Eigen/Dense>

namespace kcblb::svm {

struct SmoOptions {
  /// Stop when the maximal KKT violation m(alpha) - M(alpha) drops below this.
  double tol = 1e-5;
  long max_iter = 10'000'000;
};

/// Dual solution of a kernel SVM/SVR. Decision value at x is
/// sum_i coef_i k(x, x_i) + bias.
struct SvmModel {
  Eigen::VectorXd alpha;  // raw dual variables (2m of them for SVR)
  Eigen::VectorXd coef;   // y_i alpha_i (classifier) or alpha_i - alpha_i^* (SVR)
  double bias = 0.0;
  long iterations = 0;
  bool converged = false;

  /// Decision values for rows of a cross Gram matrix K(new, train).
  Eigen::VectorXd decision(const Eigen::MatrixXd& K_cross) const;
};

/// Soft-margin C-SVC dual: min 1/2 a'Qa - e'a, 0 <= a <= cost, y'a = 0 with
/// Q_ij = y_i y_j K_ij. Labels are +-1. Throws Error(SingleClassFold) when
/// only one class is present.
SvmModel fit_svm_classifier(const Eigen::MatrixXd& K, const Eigen::VectorXi& labels, double cost,
                            const SmoOptions& opts = {});

/// epsilon-insensitive SVR dual over (alpha, alpha^*).
SvmModel fit_svr(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double cost, double epsilon,
                 const SmoOptions& opts = {});

/// P(y = +1 | f) = 1 / (1 + exp(a f + b)).
struct PlattModel {
  double a = 0.0;
  double b = 0.0;
  bool informative = false;  // a < 0

  double probability(double decision) const;
  Eigen::VectorXd probability(const Eigen::VectorXd& decision) const;
};

/// Negative log-likelihood of Platt's smoothed targets and its gradient in (a, b).
struct PlattObjective {
  double value;
  double grad_a;
  double grad_b;
};
PlattObjective platt_objective(double a, double b, const Eigen::VectorXd& decision,
                               const Eigen::VectorXi& labels);

/// Platt scaling with target smoothing, fitted by Newton's method with
/// backtracking. Equal decision values give the smoothed prevalence
/// (m+ + 1) / (m + 2) everywhere. Throws Error(SingleClassFold) when one
/// class is absent.
PlattModel platt_calibrate(const Eigen::VectorXd& decision, const Eigen::VectorXi& labels,
                           int max_iter = 100);

}  // namespace kcblb::svm
