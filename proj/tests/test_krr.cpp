#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "kcblb/krr.hpp"

using namespace kcblb;

namespace {

// Hat matrix built from explicit inverses.
Eigen::MatrixXd hat_matrix(const Eigen::MatrixXd& K, double lambda, bool intercept) {
  const Eigen::Index n = K.rows();
  const Eigen::MatrixXd H = (K + lambda * Eigen::MatrixXd::Identity(n, n)).inverse();
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(n);
  Eigen::MatrixXd centering = Eigen::MatrixXd::Identity(n, n);
  if (intercept) centering -= one * (one.transpose() * H) / one.dot(H * one);
  return Eigen::MatrixXd::Identity(n, n) - lambda * H * centering;
}

}  // namespace

TEST_CASE("GCV scores match explicit hat matrices") {
  RngStream rng(1, 0);
  const Eigen::MatrixXd X = testing::random_matrix(rng, 40, 3);
  const Eigen::VectorXd y = (X.col(0).array().sin() + 0.3 * testing::random_vector(rng, 40).array() + 2.0).matrix();
  for (const auto& spec : {KernelSpec::linear(), KernelSpec::gaussian(1.0)}) {
    const Eigen::MatrixXd K = gram(spec, X);
    const auto grid = default_ridge_grid(K);
    for (bool intercept : {false, true}) {
      const auto scores = krr_gcv_scores(K, y, grid, intercept);
      for (std::size_t g = 0; g < grid.size(); ++g) {
        const Eigen::MatrixXd S = hat_matrix(K, grid[g], intercept);
        const double n = 40.0;
        const double rss = (y - S * y).squaredNorm();
        const double expected = n * rss / std::pow(n - S.trace(), 2);
        CHECK(scores[g] == doctest::Approx(expected).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("fit with intercept equals hat-matrix smoothing") {
  RngStream rng(2, 0);
  const Eigen::MatrixXd X = testing::random_matrix(rng, 30, 2);
  const Eigen::VectorXd y = testing::random_vector(rng, 30).array() + 5.0;
  const KernelSpec spec = KernelSpec::gaussian(0.9);
  const Eigen::MatrixXd K = gram(spec, X);
  for (bool intercept : {false, true}) {
    const auto fit = KernelRidge::fit(spec, X, K, y, 0.2, intercept);
    CHECK((fit.fitted() - hat_matrix(K, 0.2, intercept) * y).lpNorm<Eigen::Infinity>() < 1e-9);
    CHECK((fit.predict(X) - fit.fitted()).lpNorm<Eigen::Infinity>() < 1e-9);
  }
}

TEST_CASE("residuals sum to zero with an intercept") {
  RngStream rng(3, 0);
  const Eigen::MatrixXd X = testing::random_matrix(rng, 200, 4);
  const Eigen::VectorXd y = (3.0 + X.col(1).array() + testing::random_vector(rng, 200).array()).matrix();
  const Eigen::MatrixXd K = gram(KernelSpec::linear(), X);
  const auto fit = KernelRidge::fit_gcv(KernelSpec::linear(), X, K, y, true);
  const double sd = std::sqrt((y.array() - y.mean()).square().mean());
  CHECK(std::abs((y - fit.fitted()).sum()) <= 1e-6 * 200 * sd);
}

TEST_CASE("degenerate kernel with intercept gives the mean") {
  const Eigen::MatrixXd X = Eigen::MatrixXd::Zero(6, 1);
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(6, 1.0, 6.0);
  const Eigen::MatrixXd K = gram(KernelSpec::linear(), X);
  const auto fit = KernelRidge::fit(KernelSpec::linear(), X, K, y, 1.0, true);
  CHECK(fit.intercept() == doctest::Approx(3.5));
  CHECK((fit.fitted().array() - 3.5).abs().maxCoeff() < 1e-12);
}

TEST_CASE("GCV picks a small ridge for nearly noiseless data") {
  RngStream rng(4, 0);
  const Eigen::MatrixXd X = testing::random_matrix(rng, 60, 2);
  const Eigen::VectorXd y = 1.0 + 2.0 * X.col(0).array() - X.col(1).array();
  const Eigen::MatrixXd K = gram(KernelSpec::linear(), X);
  const auto fit = KernelRidge::fit_gcv(KernelSpec::linear(), X, K, y, true);
  CHECK((fit.fitted() - y).lpNorm<Eigen::Infinity>() < 1e-2);
  CHECK(fit.ridge() == doctest::Approx(default_ridge_grid(K).front()));
}

TEST_CASE("krr input checks") {
  const Eigen::MatrixXd K = Eigen::MatrixXd::Identity(3, 3);
  CHECK(testing::error_code_of([&] { krr_coefficients(K, Eigen::VectorXd::Ones(2), 1.0); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(testing::error_code_of([&] { krr_coefficients(K, Eigen::VectorXd::Ones(3), 0.0); }) ==
        ErrorCode::InvalidArgument);
}
