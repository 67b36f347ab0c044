#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "kcblb/dgp.hpp"

using namespace kcblb;

TEST_CASE("truth constants") {
  CHECK(dgp::ate_truth().true_value == 0.8);
  CHECK(dgp::ate_truth().estimand_kind == dgp::EstimandKind::Ate);
  CHECK(dgp::policy_truth().true_value == dgp::kPolicyOptimalValue);
  CHECK(dgp::policy_truth().estimand_kind == dgp::EstimandKind::OptimalValue);
}

TEST_CASE("ATE propensity") {
  const double origin[2] = {0.0, 0.0};
  const double ones[2] = {1.0, 1.0};
  CHECK(dgp::ate_propensity(origin) == 0.5);
  CHECK(dgp::ate_propensity(ones) == doctest::Approx(0.7310585786300049).epsilon(1e-15));
}

TEST_CASE("ATE potential outcomes differ by exactly tau") {
  RngStream rng(1, 0);
  const auto s = dgp::generate_ate_sample(rng, 5000);
  CHECK(s.data.coding == TreatmentCoding::ZeroOne);
  CHECK_NOTHROW(validate_dataset(s.data, TreatmentCoding::ZeroOne));
  for (Index i = 0; i < 5000; ++i) {
    CHECK(s.y1[i] == s.y0[i] + 0.8);
    CHECK(s.data.outcomes[i] == (s.data.treatments[i] == 1 ? s.y1[i] : s.y0[i]));
  }
  RngStream again(1, 0);
  const Dataset d = dgp::generate_ate(again, 5000);
  CHECK(d.outcomes == s.data.outcomes);
}

TEST_CASE("regression-adjusted ATE on a large sample") {
  RngStream rng(2, 0);
  const Index n = 1000000;
  const Dataset d = dgp::generate_ate(rng, n);
  Eigen::MatrixXd Z(n, 4);
  Z.col(0).setOnes();
  Z.col(1) = d.treatments.cast<double>();
  Z.col(2) = d.covariates.col(0);
  Z.col(3) = d.covariates.col(1);
  const Eigen::VectorXd beta = (Z.transpose() * Z).ldlt().solve(Z.transpose() * d.outcomes);
  CHECK(std::abs(beta[1] - 0.8) < 0.01);
}

TEST_CASE("ATE propensity drives treatment") {
  RngStream rng(3, 0);
  const auto s = dgp::generate_ate_sample(rng, 200000);
  double mean_w = 0.0;
  double mean_pi = 0.0;
  for (Index i = 0; i < 200000; ++i) {
    mean_w += s.data.treatments[i];
    mean_pi += s.propensity[i];
  }
  CHECK(std::abs(mean_w - mean_pi) / 200000 < 0.005);
}

TEST_CASE("policy design: fair coin independent of covariates") {
  RngStream rng(4, 0);
  const Index n = 100000;
  const Dataset d = dgp::generate_policy(rng, n);
  CHECK(d.coding == TreatmentCoding::PlusMinus);
  CHECK(d.p() == 5);
  CHECK_NOTHROW(validate_dataset(d, TreatmentCoding::PlusMinus));
  const Eigen::VectorXd w = d.treatments.cast<double>();
  CHECK(std::abs((w.array() > 0).cast<double>().mean() - 0.5) < 0.005);
  for (Index j = 0; j < 5; ++j) {
    const Eigen::VectorXd x = d.covariates.col(j);
    CHECK(x.minCoeff() >= -1.0);
    CHECK(x.maxCoeff() <= 1.0);
    const double cx = (x.array() - x.mean()).matrix().dot((w.array() - w.mean()).matrix());
    const double corr = cx / std::sqrt((x.array() - x.mean()).square().sum() * (w.array() - w.mean()).square().sum());
    CHECK(std::abs(corr) <= 4.0 / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("optimal rule") {
  const double origin[5] = {0, 0, 0.3, -0.2, 0.9};
  const double ones[5] = {1, 1, 0, 0, 0};
  CHECK(dgp::true_optimal_rule(origin) == 1);
  CHECK(dgp::true_optimal_rule(ones) == -1);
  const double boundary[5] = {0.0, 0.25, 0, 0, 0};  // 0.8 * 0.25 is exactly 0.2 in binary
  CHECK(dgp::policy_contrast(boundary) == 0.0);
  CHECK(dgp::true_optimal_rule(boundary) == -1);
}

TEST_CASE("policy outcome means") {
  const double x[5] = {0.1, -0.2, 0.3, 0.4, -0.5};
  CHECK(dgp::policy_outcome_mean(x, 1) - dgp::policy_outcome_mean(x, -1) ==
        doctest::Approx(2.0 * dgp::policy_contrast(x)).epsilon(1e-15));
  CHECK(dgp::policy_baseline(x) ==
        doctest::Approx(0.5 + 0.05 - 0.16 + 0.09 - 0.2 - 0.35).epsilon(1e-15));
}

TEST_CASE("frozen optimal value agrees with Monte Carlo") {
  RngStream rng(5, 0);
  const long m = 10000000;
  double s = 0.0;
  double s2 = 0.0;
  for (long i = 0; i < m; ++i) {
    const double x1 = rng.uniform(-1.0, 1.0);
    const double x2 = rng.uniform(-1.0, 1.0);
    const double v = 0.5 + std::abs(0.2 - 0.6 * x1 - 0.8 * x2);
    s += v;
    s2 += v * v;
  }
  const double mean = s / m;
  const double se = std::sqrt((s2 / m - mean * mean) / m);
  CHECK(se < 5e-4);
  CHECK(std::abs(mean - dgp::kPolicyOptimalValue) < 3.0 * se);
}
