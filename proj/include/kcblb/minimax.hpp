#pragma once

#include <optional>

#include <Eigen/Dense>

#include "kcblb/data.hpp"
#include "kcblb/kernels.hpp"

namespace kcblb::minimax {

struct MinimaxConfig {
  /// Polynomial kernel with d1 = 1 by default.
  KernelSpec kernel = KernelSpec::polynomial(1.0, 1, 0.0);
  double lambda = 1.0;
  /// Per-arm noise variance; estimated from KRR residuals when unset.
  std::optional<double> sigma2_treated;
  std::optional<double> sigma2_control;
  /// Append a constant column to the covariates so the RKHS contains constants.
  bool intercept = true;
};

/// Fitted quantities for one arm on one bag. Vectors are indexed by bag unit.
struct MinimaxWeightsFit {
  int arm = 1;
  Eigen::VectorXd gamma;   // gamma(X_i) for arm units, 0 elsewhere
  Eigen::VectorXd m_hat;   // outcome model prediction at every bag unit
  Eigen::VectorXd outcome_coef;  // KRR coefficients over arm units
  double lambda = 1.0;
  double sigma2 = 0.0;
  KernelSpec kernel;
};

/// (1/n^2) v' K v with v = I_a gamma - e_n.
double imbalance_sq(const Eigen::MatrixXd& K, const Eigen::VectorXi& arm_indicator,
                    const Eigen::VectorXd& gamma_full);

/// Penalized minimax weights for the arm units S:
/// (K_SS + lambda sigma2 I) gamma_S = K_{S,.} e_n. Returned in the order of S.
Eigen::VectorXd solve_weights(const Eigen::MatrixXd& K, const Eigen::VectorXi& arm_indicator,
                              double lambda, double sigma2);

/// (K_arm + ridge I) alpha = y_arm.
Eigen::VectorXd fit_outcome_krr(const Eigen::MatrixXd& K_arm, const Eigen::VectorXd& y_arm,
                                double ridge);

/// Weights plus outcome model for arm `arm` (0 or 1) of a {0,1}-coded bag.
MinimaxWeightsFit fit_arm(const Dataset& d, int arm, const MinimaxConfig& cfg);

/// Same with a precomputed bag Gram matrix.
MinimaxWeightsFit fit_arm(const Dataset& d, const Eigen::MatrixXd& K, int arm,
                          const MinimaxConfig& cfg);

/// psi_i(a) = m_a(X_i) - 1(A_i = a) gamma_a(X_i) (m_a(X_i) - Y_i).
Eigen::VectorXd augmented_score(const Eigen::VectorXd& y, const Eigen::VectorXi& treatments,
                                int arm, const Eigen::VectorXd& m_hat,
                                const Eigen::VectorXd& gamma);

/// theta_i = psi_i(1) - psi_i(0).
Contribution ate_contributions(const Dataset& d, const MinimaxWeightsFit& fit1,
                               const MinimaxWeightsFit& fit0);

/// Fit both arms on the bag and return the ATE contributions.
Contribution minimax_contributions(const Dataset& d, const MinimaxConfig& cfg);

/// Covariates with the constant column appended when cfg.intercept is set.
Eigen::MatrixXd design(const Dataset& d, const MinimaxConfig& cfg);

}  // namespace kcblb::minimax
