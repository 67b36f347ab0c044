#include "kcblb/minimax.hpp"

#include <algorithm>
#include <vector>

#include "kcblb/error.hpp"
#include "kcblb/krr.hpp"
#include "kcblb/linalg.hpp"

namespace kcblb::minimax {

namespace {

std::vector<Index> arm_units(const Eigen::VectorXi& arm_indicator) {
  std::vector<Index> idx;
  for (Index i = 0; i < arm_indicator.size(); ++i)
    if (arm_indicator[i] != 0) idx.push_back(i);
  return idx;
}

double sample_variance(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
}

}  // namespace

double imbalance_sq(const Eigen::MatrixXd& K, const Eigen::VectorXi& arm_indicator,
                    const Eigen::VectorXd& gamma_full) {
  const Index n = K.rows();
  if (K.cols() != n || arm_indicator.size() != n || gamma_full.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "imbalance_sq: sizes differ");
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = (arm_indicator[i] != 0 ? gamma_full[i] : 0.0) - 1.0;
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  return v.dot(K * v) / nn;
}

Eigen::VectorXd solve_weights(const Eigen::MatrixXd& K, const Eigen::VectorXi& arm_indicator,
                              double lambda, double sigma2) {
  const Index n = K.rows();
  if (K.cols() != n || arm_indicator.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "solve_weights: sizes differ");
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "solve_weights: lambda must be positive");
  if (!(sigma2 >= 0.0)) throw Error(ErrorCode::InvalidArgument, "solve_weights: sigma2 must be >= 0");
  const auto S = arm_units(arm_indicator);
  if (S.empty()) throw Error(ErrorCode::EmptyArm, "solve_weights: no units in arm");

  const auto m = static_cast<Index>(S.size());
  const Eigen::VectorXd row_sums = K.rowwise().sum();
  Eigen::MatrixXd K_SS(m, m);
  Eigen::VectorXd rhs(m);
  for (Index j = 0; j < m; ++j) {
    rhs[j] = row_sums[S[static_cast<std::size_t>(j)]];
    for (Index i = 0; i < m; ++i) K_SS(i, j) = K(S[static_cast<std::size_t>(i)], S[static_cast<std::size_t>(j)]);
  }
  return spd_solve(K_SS, rhs, lambda * sigma2);
}

Eigen::VectorXd fit_outcome_krr(const Eigen::MatrixXd& K_arm, const Eigen::VectorXd& y_arm,
                                double ridge) {
  if (y_arm.size() == 0) throw Error(ErrorCode::EmptyArm, "fit_outcome_krr: empty arm");
  return krr_coefficients(K_arm, y_arm, ridge);
}

Eigen::MatrixXd design(const Dataset& d, const MinimaxConfig& cfg) {
  if (!cfg.intercept) return d.covariates;
  Eigen::MatrixXd X(d.n(), d.p() + 1);
  X.leftCols(d.p()) = d.covariates;
  X.col(d.p()).setOnes();
  return X;
}

MinimaxWeightsFit fit_arm(const Dataset& d, int arm, const MinimaxConfig& cfg) {
  return fit_arm(d, gram(cfg.kernel, design(d, cfg)), arm, cfg);
}

MinimaxWeightsFit fit_arm(const Dataset& d, const Eigen::MatrixXd& K, int arm,
                          const MinimaxConfig& cfg) {
  if (d.coding != TreatmentCoding::ZeroOne)
    throw Error(ErrorCode::BadTreatmentCode, "minimax: treatments must be coded {0,1}");
  if (!(cfg.lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "minimax: lambda must be positive");
  const Index n = d.n();
  Eigen::VectorXi indicator = (d.treatments.array() == arm).cast<int>();
  const auto S = arm_units(indicator);
  if (S.empty()) throw Error(ErrorCode::EmptyArm, "minimax: arm " + std::to_string(arm) + " is empty");

  const auto m = static_cast<Index>(S.size());
  Eigen::MatrixXd K_SS(m, m);
  Eigen::VectorXd y_S(m);
  for (Index j = 0; j < m; ++j) {
    y_S[j] = d.outcomes[S[static_cast<std::size_t>(j)]];
    for (Index i = 0; i < m; ++i) K_SS(i, j) = K(S[static_cast<std::size_t>(i)], S[static_cast<std::size_t>(j)]);
  }
  const double ridge_floor = 1e-10 * std::max(1.0, K_SS.trace() / static_cast<double>(m));

  MinimaxWeightsFit fit;
  fit.arm = arm;
  fit.lambda = cfg.lambda;
  fit.kernel = cfg.kernel;

  const auto& given = arm == 1 ? cfg.sigma2_treated : cfg.sigma2_control;
  if (given) {
    fit.sigma2 = *given;
  } else {
    // Pilot fit with the outcome variance standing in for sigma2, then the
    // residual variance of that fit.
    const double pilot = std::max(ridge_floor, cfg.lambda * std::max(sample_variance(y_S), 1e-12));
    const Eigen::VectorXd coef = fit_outcome_krr(K_SS, y_S, pilot);
    fit.sigma2 = sample_variance(y_S - K_SS * coef);
  }

  const double ridge = std::max(ridge_floor, cfg.lambda * fit.sigma2);
  fit.outcome_coef = fit_outcome_krr(K_SS, y_S, ridge);

  Eigen::MatrixXd K_allS(n, m);
  for (Index j = 0; j < m; ++j) K_allS.col(j) = K.col(S[static_cast<std::size_t>(j)]);
  fit.m_hat = K_allS * fit.outcome_coef;

  const Eigen::VectorXd gamma_S = solve_weights(K, indicator, cfg.lambda, fit.sigma2);
  fit.gamma = Eigen::VectorXd::Zero(n);
  for (Index j = 0; j < m; ++j) fit.gamma[S[static_cast<std::size_t>(j)]] = gamma_S[j];
  return fit;
}

Eigen::VectorXd augmented_score(const Eigen::VectorXd& y, const Eigen::VectorXi& treatments,
                                int arm, const Eigen::VectorXd& m_hat,
                                const Eigen::VectorXd& gamma) {
  const Index n = y.size();
  if (treatments.size() != n || m_hat.size() != n || gamma.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "augmented_score: sizes differ");
  Eigen::VectorXd psi(n);
  for (Index i = 0; i < n; ++i) {
    psi[i] = m_hat[i];
    if (treatments[i] == arm) psi[i] -= gamma[i] * (m_hat[i] - y[i]);
  }
  return psi;
}

Contribution ate_contributions(const Dataset& d, const MinimaxWeightsFit& fit1,
                               const MinimaxWeightsFit& fit0) {
  return augmented_score(d.outcomes, d.treatments, 1, fit1.m_hat, fit1.gamma) -
         augmented_score(d.outcomes, d.treatments, 0, fit0.m_hat, fit0.gamma);
}

Contribution minimax_contributions(const Dataset& d, const MinimaxConfig& cfg) {
  validate_dataset(d, TreatmentCoding::ZeroOne);
  const Eigen::MatrixXd K = gram(cfg.kernel, design(d, cfg));
  const auto fit1 = fit_arm(d, K, 1, cfg);
  const auto fit0 = fit_arm(d, K, 0, cfg);
  return ate_contributions(d, fit1, fit0);
}

}  // namespace kcblb::minimax
