#include "kcblb/aol.hpp"

#include <cmath>
#include <limits>

#include "kcblb/dml.hpp"
#include "kcblb/error.hpp"
#include "kcblb/krr.hpp"
#include "kcblb/svm.hpp"

namespace kcblb::aol {

HingeValue huberized_hinge(double u, double delta) {
  if (u >= 1.0) return {0.0, 0.0};
  if (u > 1.0 - delta) {
    const double gap = 1.0 - u;
    return {gap * gap / (2.0 * delta), -gap / delta};
  }
  return {(1.0 - u) - 0.5 * delta, -1.0};
}

Eigen::VectorXd compute_residuals(const Dataset& d, const KernelSpec& kernel, double ridge) {
  const Eigen::MatrixXd K = gram(kernel, d.covariates);
  const auto fit = KernelRidge::fit(kernel, d.covariates, K, d.outcomes, ridge, true);
  return d.outcomes - fit.fitted();
}

Eigen::VectorXd compute_residuals_gcv(const Dataset& d, const KernelSpec& kernel) {
  const Eigen::MatrixXd K = gram(kernel, d.covariates);
  const auto fit = KernelRidge::fit_gcv(kernel, d.covariates, K, d.outcomes, true);
  return d.outcomes - fit.fitted();
}

AolObjective::AolObjective(const Eigen::MatrixXd& K, const Eigen::VectorXi& treatments,
                           const Eigen::VectorXd& residuals, const Eigen::VectorXd& pi,
                           double lambda, double delta)
    : K_(K), lambda_(lambda), delta_(delta) {
  const Index n = K.rows();
  if (K.cols() != n || treatments.size() != n || residuals.size() != n || pi.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "AolObjective: sizes differ");
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "aol: lambda must be positive");
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "aol: huber delta must be positive");
  weights_.resize(n);
  signs_.resize(n);
  for (Index i = 0; i < n; ++i) {
    if (!(pi[i] > 0.0 && pi[i] <= 1.0))
      throw Error(ErrorCode::InvalidArgument, "aol: propensity must lie in (0, 1]");
    weights_[i] = std::abs(residuals[i]) / pi[i];
    signs_[i] = static_cast<double>(treatments[i]) * (residuals[i] < 0.0 ? -1.0 : 1.0);
  }
}

Eigen::VectorXd AolObjective::loss_terms(const Eigen::VectorXd& f) const {
  Eigen::VectorXd out(f.size());
  for (Index i = 0; i < f.size(); ++i)
    out[i] = weights_[i] * huberized_hinge(signs_[i] * f[i], delta_).value;
  return out;
}

Eigen::VectorXd weighted_loss_terms(const Eigen::VectorXi& treatments,
                                    const Eigen::VectorXd& residuals, const Eigen::VectorXd& pi,
                                    double delta, const Eigen::VectorXd& f) {
  const Index n = f.size();
  if (treatments.size() != n || residuals.size() != n || pi.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "aol loss terms: sizes differ");
  Eigen::VectorXd out(n);
  for (Index i = 0; i < n; ++i) {
    const double sign = static_cast<double>(treatments[i]) * (residuals[i] < 0.0 ? -1.0 : 1.0);
    out[i] = std::abs(residuals[i]) / pi[i] * huberized_hinge(sign * f[i], delta).value;
  }
  return out;
}

double AolObjective::ridge_term(const Eigen::VectorXd& v) const {
  return 0.5 * lambda_ * v.dot(K_ * v);
}

double AolObjective::operator()(const Eigen::VectorXd& params, Eigen::VectorXd* grad) const {
  const Index n = K_.rows();
  const auto v = params.head(n);
  const double b = params[n];
  const Eigen::VectorXd Kv = K_ * v;
  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  Eigen::VectorXd dloss(n);
  for (Index i = 0; i < n; ++i) {
    const auto h = huberized_hinge(signs_[i] * (Kv[i] + b), delta_);
    loss += weights_[i] * h.value;
    dloss[i] = inv_n * weights_[i] * signs_[i] * h.derivative;
  }
  const double value = inv_n * loss + 0.5 * lambda_ * v.dot(Kv);
  if (grad) {
    grad->resize(n + 1);
    // d/dv = K dloss + lambda K v
    grad->head(n) = K_ * dloss + lambda_ * Kv;
    (*grad)[n] = dloss.sum();
  }
  return value;
}

Eigen::VectorXd AOLFit::decision(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd f = gram_cross(kernel, X, train_x) * rep_coefs;
  f.array() += bias;
  return f;
}

Eigen::VectorXi AOLFit::rule(const Eigen::MatrixXd& X) const {
  return decision(X).unaryExpr([](double f) { return f < 0.0 ? -1 : 1; });
}

Eigen::VectorXi AOLFit::train_rule() const {
  return train_decision.unaryExpr([](double f) { return f < 0.0 ? -1 : 1; });
}

AOLFit fit_aol(const Dataset& d, const Eigen::VectorXd& residuals, const KernelSpec& kernel,
               double lambda, double delta, const Eigen::VectorXd& pi, const LbfgsOptions& opts) {
  return fit_aol(d, gram(kernel, d.covariates), residuals, kernel, lambda, delta, pi, opts);
}

AOLFit fit_aol(const Dataset& d, const Eigen::MatrixXd& K, const Eigen::VectorXd& residuals,
               const KernelSpec& kernel, double lambda, double delta, const Eigen::VectorXd& pi,
               const LbfgsOptions& opts) {
  if (d.coding != TreatmentCoding::PlusMinus)
    throw Error(ErrorCode::BadTreatmentCode, "aol: treatments must be coded {-1,+1}");
  const Index n = d.n();
  const AolObjective objective(K, d.treatments, residuals, pi, lambda, delta);
  const Objective f = [&objective](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    return objective(x, &g);
  };
  const auto res = lbfgs_minimize(f, Eigen::VectorXd::Zero(n + 1), opts);

  AOLFit fit;
  fit.rep_coefs = res.x.head(n);
  fit.bias = res.x[n];
  fit.kernel = kernel;
  fit.train_x = d.covariates;
  fit.residuals = residuals;
  fit.pi = pi;
  fit.train_decision = (K * fit.rep_coefs).array() + fit.bias;
  fit.lambda = lambda;
  fit.huber_delta = delta;
  fit.objective = res.value;
  fit.converged = res.converged;
  fit.iterations = res.iterations;
  return fit;
}

double select_lambda_cv(const Dataset& d, const Eigen::VectorXd& residuals,
                        const KernelSpec& kernel, double delta, const Eigen::VectorXd& pi,
                        const std::vector<double>& grid, int folds, RngStream& rng,
                        const LbfgsOptions& opts) {
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "aol: empty lambda grid");
  if (grid.size() == 1) return grid.front();
  const auto split = dml::kfold_split(rng, d.n(), folds);
  std::vector<double> cv_loss(grid.size(), 0.0);
  std::vector<char> held(static_cast<std::size_t>(d.n()));
  for (const auto& fold : split) {
    std::fill(held.begin(), held.end(), 0);
    for (Index i : fold) held[static_cast<std::size_t>(i)] = 1;
    std::vector<Index> train_rows;
    for (Index i = 0; i < d.n(); ++i)
      if (!held[static_cast<std::size_t>(i)]) train_rows.push_back(i);

    const Dataset train = d.subset(train_rows);
    const Dataset test = d.subset(fold);
    Eigen::VectorXd r_train(static_cast<Index>(train_rows.size()));
    Eigen::VectorXd pi_train(r_train.size());
    for (std::size_t j = 0; j < train_rows.size(); ++j) {
      r_train[static_cast<Index>(j)] = residuals[train_rows[j]];
      pi_train[static_cast<Index>(j)] = pi[train_rows[j]];
    }
    Eigen::VectorXd r_test(static_cast<Index>(fold.size()));
    Eigen::VectorXd pi_test(r_test.size());
    for (std::size_t j = 0; j < fold.size(); ++j) {
      r_test[static_cast<Index>(j)] = residuals[fold[j]];
      pi_test[static_cast<Index>(j)] = pi[fold[j]];
    }
    const Eigen::MatrixXd K_train = gram(kernel, train.covariates);
    const Eigen::MatrixXd K_test = gram_cross(kernel, test.covariates, train.covariates);

    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto fit = fit_aol(train, K_train, r_train, kernel, grid[g], delta, pi_train, opts);
      Eigen::VectorXd f = K_test * fit.rep_coefs;
      f.array() += fit.bias;
      cv_loss[g] += weighted_loss_terms(test.treatments, r_test, pi_test, delta, f).sum();
    }
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (cv_loss[g] < cv_loss[best]) best = g;
  return grid[best];
}

Contribution aol_loss_contributions(const Dataset& d, const AOLFit& fit) {
  return weighted_loss_terms(d.treatments, fit.residuals, fit.pi, fit.huber_delta,
                             fit.train_decision);
}

Contribution rule_value_contributions(const Dataset& d, const Eigen::VectorXi& rule,
                                      const Eigen::VectorXd& m_plus,
                                      const Eigen::VectorXd& m_minus,
                                      const Eigen::VectorXd& pi_plus) {
  const Index n = d.n();
  if (rule.size() != n || m_plus.size() != n || m_minus.size() != n || pi_plus.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "aol value: sizes differ");
  Contribution theta(n);
  for (Index i = 0; i < n; ++i) {
    const int a = rule[i];
    const double m = a == 1 ? m_plus[i] : m_minus[i];
    const double p = a == 1 ? pi_plus[i] : 1.0 - pi_plus[i];
    theta[i] = m;
    if (d.treatments[i] == a) theta[i] += (d.outcomes[i] - m) / p;
  }
  return theta;
}

Contribution aol_value_contributions(const Dataset& d, const AOLFit& fit,
                                     const Eigen::VectorXd& m_plus, const Eigen::VectorXd& m_minus,
                                     const Eigen::VectorXd& pi_plus) {
  return rule_value_contributions(d, fit.train_rule(), m_plus, m_minus, pi_plus);
}

namespace {

Eigen::VectorXd arm_predictions(const Dataset& d, const KernelSpec& kernel, int arm) {
  std::vector<Index> rows;
  for (Index i = 0; i < d.n(); ++i)
    if (d.treatments[i] == arm) rows.push_back(i);
  if (rows.empty()) throw Error(ErrorCode::EmptyArm, "aol: an arm is empty in this bag");
  const Dataset sub = d.subset(rows);
  const Eigen::MatrixXd K = gram(kernel, sub.covariates);
  const auto model = KernelRidge::fit_gcv(kernel, sub.covariates, K, sub.outcomes, true);
  return model.predict(d.covariates);
}

Eigen::VectorXd estimate_propensity(const Dataset& d, const AolConfig& cfg) {
  const Eigen::MatrixXd K = gram(cfg.kernel, d.covariates);
  const auto clf = svm::fit_svm_classifier(K, d.treatments, cfg.svm_cost);
  const Eigen::VectorXd f = clf.decision(K);
  const auto platt = svm::platt_calibrate(f, d.treatments);
  return platt.probability(f).cwiseMax(cfg.propensity_clip).cwiseMin(1.0 - cfg.propensity_clip);
}

}  // namespace

Contribution aol_contributions(const Dataset& d, const AolConfig& cfg, Target target,
                               RngStream& rng) {
  validate_dataset(d, TreatmentCoding::PlusMinus);
  const Index n = d.n();
  const Eigen::VectorXd pi_plus =
      cfg.propensity ? Eigen::VectorXd::Constant(n, *cfg.propensity) : estimate_propensity(d, cfg);
  Eigen::VectorXd pi_received(n);
  for (Index i = 0; i < n; ++i) pi_received[i] = d.treatments[i] == 1 ? pi_plus[i] : 1.0 - pi_plus[i];

  const Eigen::VectorXd residuals = compute_residuals_gcv(d, cfg.kernel);
  RngStream cv_rng = rng.substream(1);
  const double lambda = select_lambda_cv(d, residuals, cfg.kernel, cfg.huber_delta, pi_received,
                                         cfg.lambda_grid, cfg.cv_folds, cv_rng, cfg.lbfgs);
  const AOLFit fit =
      fit_aol(d, residuals, cfg.kernel, lambda, cfg.huber_delta, pi_received, cfg.lbfgs);
  if (target == Target::Criterion) return aol_loss_contributions(d, fit);
  return aol_value_contributions(d, fit, arm_predictions(d, cfg.kernel, 1),
                                 arm_predictions(d, cfg.kernel, -1), pi_plus);
}

}  // namespace kcblb::aol
