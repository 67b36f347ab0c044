#pragma once

#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "kcblb/data.hpp"
#include "kcblb/error.hpp"
#include "kcblb/rng.hpp"

namespace testing {

inline Eigen::MatrixXd random_matrix(kcblb::RngStream& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

inline Eigen::VectorXd random_vector(kcblb::RngStream& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

template <typename F>
kcblb::ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const kcblb::Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected a kcblb::Error");
}

// Central differences with step 1e-6 (1 + |x_j|).
inline Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& x) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = 1e-6 * (1.0 + std::abs(x[j]));
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).lpNorm<Eigen::Infinity>() / std::max(1.0, b.lpNorm<Eigen::Infinity>());
}

}  // namespace testing
