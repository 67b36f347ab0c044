#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "kcblb/kernels.hpp"
#include "kcblb/svm.hpp"

using namespace kcblb;
using namespace kcblb::svm;

namespace {

// Largest violation of the C-SVC optimality conditions, measured on y_i f(x_i).
double classifier_kkt(const SvmModel& m, const Eigen::MatrixXd& K, const Eigen::VectorXi& y, double cost) {
  const Eigen::VectorXd f = m.decision(K);
  double worst = std::abs(y.cast<double>().dot(m.alpha));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double a = m.alpha[i];
    const double margin = y[i] * f[i];
    worst = std::max({worst, -a, a - cost});
    if (a <= 1e-12) worst = std::max(worst, 1.0 - margin);
    else if (a >= cost - 1e-12) worst = std::max(worst, margin - 1.0);
    else worst = std::max(worst, std::abs(margin - 1.0));
  }
  return worst;
}

// Same for epsilon-SVR, with coef = alpha - alpha* and residual y - f.
double regression_kkt(const SvmModel& m, const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double cost,
                      double eps) {
  const Eigen::VectorXd resid = y - m.decision(K);
  double worst = std::abs(m.coef.sum());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double c = m.coef[i];
    const double e = resid[i];
    worst = std::max(worst, std::abs(c) - cost);
    if (std::abs(c) <= 1e-12) worst = std::max(worst, std::abs(e) - eps);
    else if (c >= cost - 1e-12) worst = std::max(worst, eps - e);
    else if (c <= -cost + 1e-12) worst = std::max(worst, eps + e);
    else if (c > 0) worst = std::max(worst, std::abs(e - eps));
    else worst = std::max(worst, std::abs(e + eps));
  }
  return worst;
}

Eigen::MatrixXd column(std::initializer_list<double> v) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double d : v) x(i++, 0) = d;
  return x;
}

}  // namespace

TEST_CASE("symmetric separable pair") {
  const Eigen::MatrixXd X = column({-1.0, 1.0});
  const Eigen::MatrixXd K = gram(KernelSpec::linear(), X);
  const Eigen::VectorXi y = Eigen::Vector2i(-1, 1);
  const SvmModel m = fit_svm_classifier(K, y, 10.0);
  const Eigen::VectorXd f = m.decision(K);
  CHECK(f[0] < 0.0);
  CHECK(f[1] > 0.0);
  CHECK(std::abs(m.decision(gram_cross(KernelSpec::linear(), column({0.0}), X))[0]) < 1e-8);
  CHECK(classifier_kkt(m, K, y, 10.0) <= 1e-4);
}

TEST_CASE("conflicting labels at one point") {
  const Eigen::MatrixXd X = column({0.5, 0.5, -2.0, 3.0});
  const Eigen::MatrixXd K = gram(KernelSpec::gaussian(1.0), X);
  const Eigen::VectorXi y = Eigen::Vector4i(1, -1, -1, 1);
  const SvmModel m = fit_svm_classifier(K, y, 1.0);
  CHECK(m.converged);
  CHECK(classifier_kkt(m, K, y, 1.0) <= 1e-4);
  const Eigen::VectorXd f = m.decision(K);
  CHECK(std::abs(f[0]) < std::abs(f[2]));
  CHECK(std::abs(f[0]) < std::abs(f[3]));
}

TEST_CASE("separable random problems are fit without error") {
  RngStream rng(1, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd X = testing::random_matrix(rng, 40, 2);
    Eigen::VectorXi y(40);
    for (Eigen::Index i = 0; i < 40; ++i) y[i] = X(i, 0) + 0.5 * X(i, 1) > 0.0 ? 1 : -1;
    y[0] = 1;
    y[1] = -1;
    Eigen::MatrixXd Xs = X;
    Xs.row(0) << 3.0, 0.0;
    Xs.row(1) << -3.0, 0.0;
    const Eigen::MatrixXd K = gram(KernelSpec::linear(), Xs);
    const double cost = 1e4;
    const SvmModel m = fit_svm_classifier(K, y, cost);
    const Eigen::VectorXd f = m.decision(K);
    for (Eigen::Index i = 0; i < 40; ++i) CHECK(y[i] * f[i] > 0.0);
    CHECK(classifier_kkt(m, K, y, cost) <= 1e-4);
  }
}

TEST_CASE("classifier KKT on noisy problems") {
  RngStream rng(2, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd X = testing::random_matrix(rng, 60, 3);
    Eigen::VectorXi y(60);
    for (Eigen::Index i = 0; i < 60; ++i) y[i] = X(i, 0) + rng.normal() > 0.0 ? 1 : -1;
    for (const auto& spec : {KernelSpec::linear(), KernelSpec::gaussian(1.5)}) {
      const Eigen::MatrixXd K = gram(spec, X);
      const SvmModel m = fit_svm_classifier(K, y, 1.0);
      CHECK(m.converged);
      CHECK(classifier_kkt(m, K, y, 1.0) <= 1e-4);
    }
  }
}

TEST_CASE("classifier input errors") {
  const Eigen::MatrixXd K = Eigen::MatrixXd::Identity(3, 3);
  CHECK(testing::error_code_of([&] { fit_svm_classifier(K, Eigen::Vector3i(1, 1, 1), 1.0); }) ==
        ErrorCode::SingleClassFold);
}

TEST_CASE("SVR examples") {
  const Eigen::MatrixXd X = Eigen::VectorXd::LinSpaced(10, 0.0, 1.0);
  const Eigen::MatrixXd K = gram(KernelSpec::linear(), X);

  const SvmModel flat = fit_svr(K, Eigen::VectorXd::Constant(10, 2.5), 1.0, 0.1);
  CHECK(flat.coef.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((flat.decision(K).array() - 2.5).abs().maxCoeff() <= 0.1 + 1e-9);

  const Eigen::VectorXd y = X.col(0);
  const SvmModel line = fit_svr(K, y, 100.0, 0.01);
  CHECK((line.decision(K) - y).lpNorm<Eigen::Infinity>() <= 0.05);
  CHECK(regression_kkt(line, K, y, 100.0, 0.01) <= 1e-4);

  const SvmModel dead = fit_svr(K, y, 1.0, 2.0);
  CHECK(dead.coef.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((dead.decision(K) - y).lpNorm<Eigen::Infinity>() <= 2.0);
}

TEST_CASE("SVR KKT on noisy problems") {
  RngStream rng(3, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd X = testing::random_matrix(rng, 50, 2);
    Eigen::VectorXd y(50);
    for (Eigen::Index i = 0; i < 50; ++i) y[i] = X(i, 0) - X(i, 1) + rng.normal();
    for (const auto& spec : {KernelSpec::linear(), KernelSpec::gaussian(2.0)}) {
      const Eigen::MatrixXd K = gram(spec, X);
      const SvmModel m = fit_svr(K, y, 1.0, 0.1);
      CHECK(m.converged);
      CHECK(regression_kkt(m, K, y, 1.0, 0.1) <= 1e-4);
    }
  }
}

TEST_CASE("Platt saturates on separated decisions") {
  // Smoothed targets cap the fit at (m+ + 1)/(m+ + 2), so saturation past
  // 0.99 needs at least 99 units per class.
  Eigen::VectorXd f(400);
  Eigen::VectorXi y(400);
  for (Eigen::Index i = 0; i < 400; ++i) {
    y[i] = i < 200 ? 1 : -1;
    f[i] = 10.0 * y[i];
  }
  const PlattModel p = platt_calibrate(f, y);
  CHECK(p.informative);
  CHECK(p.a < 0.0);
  for (Eigen::Index i = 0; i < 400; ++i) {
    if (y[i] == 1) CHECK(p.probability(f[i]) >= 0.99);
    else CHECK(p.probability(f[i]) <= 0.01);
  }
}

TEST_CASE("Platt on uninformative decisions returns the prevalence") {
  RngStream rng(4, 0);
  const Eigen::Index n = 4000;
  Eigen::VectorXd f(n);
  Eigen::VectorXi y(n);
  int pos = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    f[i] = rng.normal();
    y[i] = rng.bernoulli(0.3) ? 1 : -1;
    pos += y[i] == 1;
  }
  const PlattModel p = platt_calibrate(f, y);
  const double prevalence = static_cast<double>(pos) / static_cast<double>(n);
  for (double x : {-2.0, 0.0, 2.0}) CHECK(std::abs(p.probability(x) - prevalence) <= 0.05);
}

TEST_CASE("Platt with equal decisions returns the smoothed prevalence") {
  const Eigen::VectorXd f = Eigen::VectorXd::Constant(10, 0.7);
  Eigen::VectorXi y(10);
  y << 1, 1, 1, -1, -1, -1, -1, -1, -1, -1;
  const PlattModel p = platt_calibrate(f, y);
  CHECK(p.probability(0.7) == doctest::Approx(4.0 / 12.0).epsilon(1e-12));
  CHECK_FALSE(p.informative);
  CHECK(testing::error_code_of([&] { platt_calibrate(f, Eigen::VectorXi::Ones(10)); }) ==
        ErrorCode::SingleClassFold);
}

TEST_CASE("Platt objective gradient matches finite differences") {
  RngStream rng(5, 0);
  const Eigen::VectorXd f = testing::random_vector(rng, 30);
  Eigen::VectorXi y(30);
  for (Eigen::Index i = 0; i < 30; ++i) y[i] = f[i] + rng.normal() > 0 ? 1 : -1;
  for (int point = 0; point < 20; ++point) {
    const Eigen::Vector2d x(2.0 * rng.normal(), rng.normal());
    const auto obj = platt_objective(x[0], x[1], f, y);
    const Eigen::VectorXd num = testing::numeric_gradient(
        [&](const Eigen::VectorXd& v) { return platt_objective(v[0], v[1], f, y).value; }, x);
    CHECK(testing::relative_error(Eigen::Vector2d(obj.grad_a, obj.grad_b), num) <= 1e-4);
  }
}
