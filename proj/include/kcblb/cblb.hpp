#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kcblb/data.hpp"
#include "kcblb/rng.hpp"

namespace kcblb {

/// Fits whatever the estimator needs on one bag and returns one contribution
/// per bag unit. Must be deterministic given (bag data, stream) and must not
/// look outside the bag.
struct EstimatorPlugin {
  std::string name;
  std::function<Contribution(const Dataset& bag, RngStream& rng)> fit_contribute;
};

/// Random permutation of 0..n-1 chunked into s blocks of b; the remaining
/// n - s*b indices are unused. Throws Error(ConfigInfeasible) when s*b > n.
std::vector<std::vector<Index>> partition(RngStream& rng, Index n, Index b, Index s);

/// (1/n) sum_a counts[a] * theta[a]. Throws Error(CountSumMismatch) unless
/// the counts sum to n.
double replicate(const Contribution& contributions, std::span<const std::int64_t> counts,
                 std::int64_t n);

/// Type-1 empirical quantile: the ceil(q r)-th order statistic (1-based).
double empirical_quantile(std::vector<double> values, double q);

struct ReplicateSet {
  Eigen::MatrixXd values;         // s x r
  Eigen::VectorXd bag_estimates;  // theta_k
  std::vector<Contribution> contributions;
  std::vector<std::vector<Index>> bags;
};

struct CblbRun {
  IntervalResult interval;
  ReplicateSet replicates;
  double fit_seconds = 0.0;       // summed over bags
  double resample_seconds = 0.0;  // summed over bags
  std::vector<double> bag_fit_seconds;
};

/// Bag of little bootstraps over frozen per-unit contributions. Bags run on
/// up to `workers` threads; the result does not depend on the worker count.
/// A failing bag aborts the run with Error(BagFailure) naming the bag.
CblbRun run_cblb(const Dataset& d, const EstimatorPlugin& plugin, const CBLBConfig& cfg,
                 unsigned workers = 1);

/// One fit on all n units followed by r multinomial(n; 1/n...) reweightings;
/// literally run_cblb with s = 1, b = n.
CblbRun run_full_bootstrap(const Dataset& d, const EstimatorPlugin& plugin, Index r, double alpha,
                           std::uint64_t seed);

struct NormalityDiagnostic {
  double ks_distance = 0.0;
  double threshold = 0.0;  // 1.63 / sqrt(r)
  bool pass = false;
  double sigma = 0.0;      // sd of the bag contributions (1/b normalization)
};

/// Kolmogorov-Smirnov distance between sqrt(n)(theta* - theta_k)/sigma_k and
/// N(0,1) for bag k. Throws Error(ZeroVariance) if the contributions are constant.
NormalityDiagnostic normality_check(const ReplicateSet& rep, Index bag, Index n);

}  // namespace kcblb
