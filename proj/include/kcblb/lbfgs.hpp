#pragma once

#include <functional>

#include <Eigen/Dense>

namespace kcblb {

/// Objective callback: returns f(x) and writes the gradient into `grad`
/// (already sized like x).
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct LbfgsOptions {
  int memory = 10;
  double tol = 1e-6;  // on the infinity norm of the gradient
  int max_iter = 500;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_linesearch = 40;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double grad_inf_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Limited-memory BFGS with a strong-Wolfe line search. Returns the best
/// iterate found; `converged` says whether the gradient tolerance was met.
/// Throws Error(NonFiniteObjective) if f or its gradient is NaN/inf at any
/// evaluated point.
LbfgsResult lbfgs_minimize(const Objective& f, const Eigen::VectorXd& x0,
                           const LbfgsOptions& opts = {});

}  // namespace kcblb
