#include "kcblb/dgp.hpp"

#include <cmath>

#include "kcblb/error.hpp"

namespace kcblb::dgp {

Truth ate_truth(double tau) { return {EstimandKind::Ate, tau}; }

Truth policy_truth() { return {EstimandKind::OptimalValue, kPolicyOptimalValue}; }

double ate_propensity(std::span<const double> x) {
  return 1.0 / (1.0 + std::exp(-0.5 * x[0] - 0.5 * x[1]));
}

AteSample generate_ate_sample(RngStream& rng, Index n, double tau) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "generate_ate: n must be positive");
  AteSample s;
  s.data.coding = TreatmentCoding::ZeroOne;
  s.data.outcomes.resize(n);
  s.data.treatments.resize(n);
  s.data.covariates.resize(n, 2);
  s.y0.resize(n);
  s.y1.resize(n);
  s.propensity.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double x[2] = {rng.normal(), rng.normal()};
    const double pi = ate_propensity(x);
    const int w = rng.bernoulli(pi) ? 1 : 0;
    const double eps = rng.normal();
    s.data.covariates(i, 0) = x[0];
    s.data.covariates(i, 1) = x[1];
    s.propensity[i] = pi;
    s.y0[i] = x[0] + x[1] + eps;
    s.y1[i] = s.y0[i] + tau;
    s.data.treatments[i] = w;
    s.data.outcomes[i] = w == 1 ? s.y1[i] : s.y0[i];
  }
  return s;
}

Dataset generate_ate(RngStream& rng, Index n, double tau) {
  return generate_ate_sample(rng, n, tau).data;
}

double ate_outcome_mean(std::span<const double> x, int arm, double tau) {
  return x[0] + x[1] + (arm == 1 ? tau : 0.0);
}

Dataset generate_policy(RngStream& rng, Index n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "generate_policy: n must be positive");
  Dataset d;
  d.coding = TreatmentCoding::PlusMinus;
  d.outcomes.resize(n);
  d.treatments.resize(n);
  d.covariates.resize(n, 5);
  double x[5];
  for (Index i = 0; i < n; ++i) {
    for (int j = 0; j < 5; ++j) {
      x[j] = rng.uniform(-1.0, 1.0);
      d.covariates(i, j) = x[j];
    }
    const int w = rng.bernoulli(0.5) ? 1 : -1;
    const double eps = rng.normal();
    d.treatments[i] = w;
    d.outcomes[i] = policy_outcome_mean(x, w) + eps;
  }
  return d;
}

double policy_baseline(std::span<const double> x) {
  return 0.5 + 0.5 * x[0] + 0.8 * x[1] + 0.3 * x[2] - 0.5 * x[3] + 0.7 * x[4];
}

double policy_contrast(std::span<const double> x) { return 0.2 - 0.6 * x[0] - 0.8 * x[1]; }

double policy_outcome_mean(std::span<const double> x, int w) {
  return policy_baseline(x) + static_cast<double>(w) * policy_contrast(x);
}

int true_optimal_rule(std::span<const double> x) {
  if (x.size() != 5) throw Error(ErrorCode::DimensionMismatch, "true_optimal_rule expects 5 covariates");
  return policy_contrast(x) > 0.0 ? 1 : -1;
}

}  // namespace kcblb::dgp
