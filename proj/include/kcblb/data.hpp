#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace kcblb {

using Index = Eigen::Index;

enum class TreatmentCoding {
  ZeroOne,    // {0, 1}, used by the ATE estimators
  PlusMinus,  // {-1, +1}, used by policy learning
};

/// Observed units Z_i = (Y_i, A_i, X_i). Rows of `covariates` line up with
/// `outcomes` and `treatments`.
struct Dataset {
  Eigen::VectorXd outcomes;
  Eigen::VectorXi treatments;
  Eigen::MatrixXd covariates;
  TreatmentCoding coding = TreatmentCoding::ZeroOne;

  Index n() const { return outcomes.size(); }
  Index p() const { return covariates.cols(); }

  /// Rows `idx` in the given order.
  Dataset subset(std::span<const Index> idx) const;
};

/// Throws DataError naming the first offending column/row.
void validate_dataset(const Dataset& d, TreatmentCoding coding);

/// Explicit recoding between {0,1} and {-1,+1}. 0 <-> -1, 1 <-> +1.
Dataset to_plus_minus(const Dataset& d);
Dataset to_zero_one(const Dataset& d);

/// Per-unit contributions theta_{i,k} for one bag.
using Contribution = Eigen::VectorXd;

void validate_contribution(const Contribution& c, Index expected_size);

struct CBLBConfig {
  Index n_total = 0;
  Index bag_size = 0;
  Index n_bags = 0;
  Index n_replicates = 0;
  double alpha = 0.05;
  std::uint64_t seed = 0;

  /// b = round(n^gamma), s = floor(n / b).
  static CBLBConfig from_gamma(Index n, double gamma, Index r, double alpha,
                               std::uint64_t seed);

  /// Throws Error(ConfigInfeasible) when the invariants fail.
  void validate() const;

  /// True when r is small enough that the tail quantiles sit on the
  /// extreme order statistics (r < 40 at alpha = 0.05).
  bool coarse_quantiles() const;
};

struct IntervalResult {
  double point_estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double se = 0.0;
  std::vector<std::pair<double, double>> per_bag_quantiles;
  double wall_time_seconds = 0.0;
};

}  // namespace kcblb
