#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "helpers.hpp"
#include "kcblb/dgp.hpp"
#include "kcblb/dml.hpp"
#include "kcblb/parallel.hpp"

using namespace kcblb;
using namespace kcblb::dml;

namespace {

Nuisances oracle_nuisances(const Dataset&, const Dataset& eval, const DMLConfig&) {
  Nuisances nu;
  const Index n = eval.n();
  nu.propensity.resize(n);
  nu.m1.resize(n);
  nu.m0.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double x[2] = {eval.covariates(i, 0), eval.covariates(i, 1)};
    nu.propensity[i] = dgp::ate_propensity(x);
    nu.m1[i] = dgp::ate_outcome_mean(x, 1);
    nu.m0[i] = dgp::ate_outcome_mean(x, 0);
  }
  return nu;
}

Nuisances wild_propensity(const Dataset&, const Dataset& eval, const DMLConfig&) {
  Nuisances nu;
  nu.propensity = Eigen::VectorXd::LinSpaced(eval.n(), -0.5, 1.5);
  nu.m1 = Eigen::VectorXd::Zero(eval.n());
  nu.m0 = Eigen::VectorXd::Zero(eval.n());
  return nu;
}

double se_of_mean(const Eigen::VectorXd& v) {
  const double n = static_cast<double>(v.size());
  return std::sqrt((v.array() - v.mean()).square().sum() / (n - 1.0) / n);
}

}  // namespace

TEST_CASE("kfold_split examples") {
  RngStream rng(1, 0);
  const auto two = kfold_split(rng, 10, 2);
  REQUIRE(two.size() == 2);
  CHECK(two[0].size() == 5);
  CHECK(two[1].size() == 5);
  const auto three = kfold_split(rng, 7, 3);
  CHECK(three[0].size() == 3);
  CHECK(three[1].size() == 2);
  CHECK(three[2].size() == 2);
  CHECK(testing::error_code_of([&] { kfold_split(rng, 3, 4); }) == ErrorCode::TooManyFolds);
}

TEST_CASE("kfold_split always partitions") {
  RngStream rng(2, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.below(60));
    const int K = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    const auto folds = kfold_split(rng, n, K);
    REQUIRE(folds.size() == static_cast<std::size_t>(K));
    std::vector<int> hits(static_cast<std::size_t>(n), 0);
    std::size_t smallest = folds[0].size();
    std::size_t largest = folds[0].size();
    for (const auto& f : folds) {
      smallest = std::min(smallest, f.size());
      largest = std::max(largest, f.size());
      for (Index i : f) ++hits[static_cast<std::size_t>(i)];
    }
    CHECK(largest - smallest <= 1);
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
}

TEST_CASE("config validation") {
  DMLConfig cfg;
  cfg.n_folds = 1;
  CHECK(testing::error_code_of([&] { cfg.validate(); }) == ErrorCode::InvalidArgument);
  cfg = DMLConfig{};
  cfg.propensity_clip = 0.5;
  CHECK(testing::error_code_of([&] { cfg.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("AIPW collapses to Horvitz-Thompson") {
  RngStream rng(3, 0);
  const Dataset d = dgp::generate_ate(rng, 100);
  Nuisances nu;
  nu.propensity = Eigen::VectorXd::Constant(100, 0.5);
  nu.m1 = Eigen::VectorXd::Zero(100);
  nu.m0 = Eigen::VectorXd::Zero(100);
  const Contribution theta = aipw_contributions(d, nu);
  for (Index i = 0; i < 100; ++i) CHECK(theta[i] == 2.0 * d.outcomes[i] * (2 * d.treatments[i] - 1));
}

TEST_CASE("AIPW matches the gamma-weighted form with gamma = 1/pi") {
  RngStream rng(4, 0);
  const Dataset d = dgp::generate_ate(rng, 50);
  Nuisances nu;
  nu.propensity = (0.2 + 0.6 * (testing::random_vector(rng, 50).array().tanh() + 1.0) / 2.0).matrix();
  nu.m1 = testing::random_vector(rng, 50);
  nu.m0 = testing::random_vector(rng, 50);
  const Contribution theta = aipw_contributions(d, nu);
  for (Index i = 0; i < 50; ++i) {
    const double g1 = 1.0 / nu.propensity[i];
    const double g0 = 1.0 / (1.0 - nu.propensity[i]);
    const double a = d.treatments[i];
    const double y = d.outcomes[i];
    const double expected = (nu.m1[i] - a * g1 * (nu.m1[i] - y)) - (nu.m0[i] - (1 - a) * g0 * (nu.m0[i] - y));
    CHECK(theta[i] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("oracle nuisances recover the ATE") {
  RngStream rng(5, 0);
  const Dataset d = dgp::generate_ate(rng, 5000);
  RngStream fold_rng(5, 1);
  const Contribution theta = cross_fit(d, DMLConfig{}, fold_rng, oracle_nuisances).contributions;
  CHECK(std::abs(theta.mean() - 0.8) <= 3.0 * se_of_mean(theta));
}

TEST_CASE("cross-fitting never predicts a unit from a model trained on it") {
  RngStream rng(6, 0);
  const Dataset d = dgp::generate_ate(rng, 200);
  RngStream fold_rng(6, 1);
  const CrossFit cf = cross_fit(d, DMLConfig{}, fold_rng);
  REQUIRE(cf.training_sets.size() == cf.folds.size());
  for (Index i = 0; i < d.n(); ++i) {
    const int k = cf.fold_of[static_cast<std::size_t>(i)];
    REQUIRE(k >= 0);
    const auto& train = cf.training_sets[static_cast<std::size_t>(k)];
    CHECK(std::find(train.begin(), train.end(), i) == train.end());
    const auto& fold = cf.folds[static_cast<std::size_t>(k)];
    CHECK(std::find(fold.begin(), fold.end(), i) != fold.end());
  }
  for (std::size_t k = 0; k < cf.folds.size(); ++k)
    CHECK(cf.training_sets[k].size() + cf.folds[k].size() == static_cast<std::size_t>(d.n()));
}

TEST_CASE("propensities are clipped") {
  RngStream rng(7, 0);
  const Dataset d = dgp::generate_ate(rng, 100);
  DMLConfig cfg;
  cfg.propensity_clip = 0.05;
  RngStream fold_rng(7, 1);
  const CrossFit cf = cross_fit(d, cfg, fold_rng, wild_propensity);
  CHECK(cf.nuisances.propensity.minCoeff() >= 0.05);
  CHECK(cf.nuisances.propensity.maxCoeff() <= 0.95);
  CHECK(cf.nuisances.propensity.minCoeff() == 0.05);

  RngStream svm_rng(7, 2);
  const CrossFit real = cross_fit(d, cfg, svm_rng);
  CHECK(real.nuisances.propensity.minCoeff() >= 0.05);
  CHECK(real.nuisances.propensity.maxCoeff() <= 0.95);
  CHECK(real.contributions.allFinite());
}

TEST_CASE("permuting units permutes contributions") {
  RngStream rng(8, 0);
  const Index n = 150;
  const Dataset d = dgp::generate_ate(rng, n);
  const auto perm = random_permutation(rng, n);
  const Dataset dp = d.subset(perm);
  std::vector<Index> position(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) position[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])] = j;

  RngStream fold_rng(8, 1);
  const auto folds = kfold_split(fold_rng, n, 5);
  auto mapped = folds;
  for (auto& f : mapped)
    for (Index& i : f) i = position[static_cast<std::size_t>(i)];

  const Contribution exact = cross_fit_folds(d, DMLConfig{}, folds, oracle_nuisances).contributions;
  const Contribution exact_p = cross_fit_folds(dp, DMLConfig{}, mapped, oracle_nuisances).contributions;
  const Contribution svm = cross_fit_folds(d, DMLConfig{}, folds).contributions;
  const Contribution svm_p = cross_fit_folds(dp, DMLConfig{}, mapped).contributions;
  double worst = 0.0;
  for (Index j = 0; j < n; ++j) {
    const Index i = perm[static_cast<std::size_t>(j)];
    CHECK(exact_p[j] == exact[i]);
    worst = std::max(worst, std::abs(svm_p[j] - svm[i]));
  }
  // The SVM solvers visit points in a different order, so agreement is up
  // to their stopping tolerance.
  CHECK(worst <= 1e-3);

  RngStream again(8, 1);
  CHECK(cross_fit(d, DMLConfig{}, again).contributions == cross_fit_folds(d, DMLConfig{}, folds).contributions);
}

TEST_CASE("fold re-draws and single-arm failures") {
  RngStream rng(9, 0);
  Dataset d = dgp::generate_ate(rng, 30);
  d.treatments.setZero();
  d.treatments[0] = 1;
  RngStream fold_rng(9, 1);
  CHECK(testing::error_code_of([&] { cross_fit(d, DMLConfig{}, fold_rng); }) == ErrorCode::SingleClassFold);
}

TEST_CASE("sampling: full-sample DML on the ATE design is centred on the truth") {
  const int reps = 100;
  std::vector<double> est(reps);
  parallel_for(reps, 0, [&](std::size_t j) {
    RngStream rng(10, {0, j});
    const Dataset d = dgp::generate_ate(rng, 4000);
    RngStream fold_rng(10, {1, j});
    est[j] = dml_contributions(d, DMLConfig{}, fold_rng).mean();
  });
  const Eigen::Map<Eigen::VectorXd> v(est.data(), reps);
  const double sd = std::sqrt((v.array() - v.mean()).square().sum() / (reps - 1));
  MESSAGE("mean " << v.mean() << " sd " << sd);
  CHECK(std::abs(v.mean() - 0.8) <= 3.0 * sd / std::sqrt(static_cast<double>(reps)));
}
