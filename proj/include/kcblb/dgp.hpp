#pragma once

#include <span>

#include <Eigen/Dense>

#include "kcblb/data.hpp"
#include "kcblb/rng.hpp"

namespace kcblb::dgp {

enum class EstimandKind { Ate, OptimalValue };

struct Truth {
  EstimandKind estimand_kind;
  double true_value;
};

inline constexpr double kDefaultTau = 0.8;

/// Value of the policy design under its optimal rule:
/// V* = 0.5 + E|0.2 - 0.6 X1 - 0.8 X2| with X ~ U(-1,1)^2, which integrates
/// to exactly 1 (the Monte Carlo check lives in the tests).
inline constexpr double kPolicyOptimalValue = 1.0;

Truth ate_truth(double tau = kDefaultTau);
Truth policy_truth();

/// ATE design with both potential outcomes kept for oracle checks.
struct AteSample {
  Dataset data;
  Eigen::VectorXd y0;
  Eigen::VectorXd y1;
  Eigen::VectorXd propensity;
};

/// Pr(W = 1 | X) = 1 / (1 + exp(-0.5 X1 - 0.5 X2)).
double ate_propensity(std::span<const double> x);

/// X1, X2 ~ N(0,1); W ~ Bernoulli(propensity); Y(0) = X1 + X2 + eps;
/// Y(1) = Y(0) + tau; Y = Y(W). Treatments coded {0,1}.
AteSample generate_ate_sample(RngStream& rng, Index n, double tau = kDefaultTau);
Dataset generate_ate(RngStream& rng, Index n, double tau = kDefaultTau);

/// E[Y | A = a, X] under the ATE design.
double ate_outcome_mean(std::span<const double> x, int arm, double tau = kDefaultTau);

/// X1..X5 ~ U(-1,1); W = +-1 with probability 1/2 each; treatments coded {-1,+1}.
Dataset generate_policy(RngStream& rng, Index n);

/// 0.5 + 0.5 X1 + 0.8 X2 + 0.3 X3 - 0.5 X4 + 0.7 X5
double policy_baseline(std::span<const double> x);
/// 0.2 - 0.6 X1 - 0.8 X2
double policy_contrast(std::span<const double> x);
/// E[Y | W = w, X]
double policy_outcome_mean(std::span<const double> x, int w);

/// +1 iff 0.2 - 0.6 x[0] - 0.8 x[1] > 0, else -1.
int true_optimal_rule(std::span<const double> x);

}  // namespace kcblb::dgp
