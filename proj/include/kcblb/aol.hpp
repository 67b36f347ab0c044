#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "kcblb/data.hpp"
#include "kcblb/kernels.hpp"
#include "kcblb/lbfgs.hpp"
#include "kcblb/rng.hpp"

namespace kcblb::aol {

struct HingeValue {
  double value;
  double derivative;
};

/// Huberized hinge: 0 for u >= 1, (1-u)^2 / (2 delta) on (1-delta, 1),
/// (1-u) - delta/2 for u <= 1-delta.
HingeValue huberized_hinge(double u, double delta);

/// r_i = Y_i - g(X_i) with g the pooled kernel ridge fit (unpenalized
/// intercept) of Y on X.
Eigen::VectorXd compute_residuals(const Dataset& d, const KernelSpec& kernel, double ridge);

/// Same with the ridge chosen by generalized cross-validation.
Eigen::VectorXd compute_residuals_gcv(const Dataset& d, const KernelSpec& kernel);

/// |r_i| / pi_i * phi(a_i sign(r_i) f_i) for decision values f.
Eigen::VectorXd weighted_loss_terms(const Eigen::VectorXi& treatments,
                                    const Eigen::VectorXd& residuals, const Eigen::VectorXd& pi,
                                    double delta, const Eigen::VectorXd& f);

/// Penalized weighted surrogate risk
///   (1/n) sum_i |r_i| / pi_i * phi(a_i sign(r_i) (h(x_i) + b)) + (lambda/2) v'Kv,
/// h = K v, over params = (v, b). Writes the gradient when `grad` is non-null.
class AolObjective {
 public:
  AolObjective(const Eigen::MatrixXd& K, const Eigen::VectorXi& treatments,
               const Eigen::VectorXd& residuals, const Eigen::VectorXd& pi, double lambda,
               double delta);

  double operator()(const Eigen::VectorXd& params, Eigen::VectorXd* grad) const;
  /// Weighted loss terms at decision values f.
  Eigen::VectorXd loss_terms(const Eigen::VectorXd& f) const;
  double ridge_term(const Eigen::VectorXd& v) const;

  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& signs() const { return signs_; }

 private:
  const Eigen::MatrixXd& K_;
  Eigen::VectorXd weights_;  // |r_i| / pi_i
  Eigen::VectorXd signs_;    // a_i sign(r_i)
  double lambda_;
  double delta_;
};

struct AOLFit {
  Eigen::VectorXd rep_coefs;  // v
  double bias = 0.0;
  KernelSpec kernel;
  Eigen::MatrixXd train_x;
  Eigen::VectorXd residuals;
  Eigen::VectorXd pi;              // pi(a_i, x_i)
  Eigen::VectorXd train_decision;  // h(x_i) + b on the training units
  double lambda = 1.0;
  double huber_delta = 1.0;
  double objective = 0.0;
  bool converged = false;
  int iterations = 0;

  /// h(x) + b at new points.
  Eigen::VectorXd decision(const Eigen::MatrixXd& X) const;
  /// sign(h(x) + b) in {-1, +1}; zero maps to +1.
  Eigen::VectorXi rule(const Eigen::MatrixXd& X) const;
  Eigen::VectorXi train_rule() const;
};

/// Minimizes the AOL objective with L-BFGS from v = 0, b = 0.
/// `pi` holds pi(a_i, x_i), the probability of the treatment actually received.
AOLFit fit_aol(const Dataset& d, const Eigen::VectorXd& residuals, const KernelSpec& kernel,
               double lambda, double delta, const Eigen::VectorXd& pi,
               const LbfgsOptions& opts = {});

/// Same with a precomputed Gram matrix of d.covariates.
AOLFit fit_aol(const Dataset& d, const Eigen::MatrixXd& K, const Eigen::VectorXd& residuals,
               const KernelSpec& kernel, double lambda, double delta, const Eigen::VectorXd& pi,
               const LbfgsOptions& opts = {});

/// K-fold CV over `grid` on the held-out weighted surrogate loss. Ties go to
/// the earlier grid entry.
double select_lambda_cv(const Dataset& d, const Eigen::VectorXd& residuals,
                        const KernelSpec& kernel, double delta, const Eigen::VectorXd& pi,
                        const std::vector<double>& grid, int folds, RngStream& rng,
                        const LbfgsOptions& opts = {});

/// theta_i = |r_i| / pi_i * phi(a_i sign(r_i) (h(x_i) + b)).
Contribution aol_loss_contributions(const Dataset& d, const AOLFit& fit);

/// AIPW value of the fixed rule d(x) = sign(h(x) + b):
/// theta_i = m_d(X_i) + 1(A_i = d(X_i)) (Y_i - m_d(X_i)) / pi(d(X_i) | X_i).
/// m_plus/m_minus are outcome predictions under +1/-1 at the bag units and
/// pi_plus = P(A = +1 | X_i).
Contribution aol_value_contributions(const Dataset& d, const AOLFit& fit,
                                     const Eigen::VectorXd& m_plus, const Eigen::VectorXd& m_minus,
                                     const Eigen::VectorXd& pi_plus);

/// Same for an arbitrary rule vector.
Contribution rule_value_contributions(const Dataset& d, const Eigen::VectorXi& rule,
                                      const Eigen::VectorXd& m_plus,
                                      const Eigen::VectorXd& m_minus,
                                      const Eigen::VectorXd& pi_plus);

enum class Target { Value, Criterion };

struct AolConfig {
  KernelSpec kernel = KernelSpec::linear();
  std::vector<double> lambda_grid = {0.01, 0.1, 1.0, 10.0};
  double huber_delta = 1.0;
  int cv_folds = 5;
  /// Known P(A = +1 | X); estimated by SVM + Platt on the bag when unset.
  std::optional<double> propensity = 0.5;
  double propensity_clip = 0.01;
  double svm_cost = 1.0;
  LbfgsOptions lbfgs;
};

/// Whole per-bag pipeline: residuals, propensity, lambda by CV, fit, then the
/// requested contribution. Expects {-1,+1} coding.
Contribution aol_contributions(const Dataset& d, const AolConfig& cfg, Target target,
                               RngStream& rng);

}  // namespace kcblb::aol
