#pragma once

#include <string>
#include <vector>

#include "kcblb/cblb.hpp"

namespace kcblb {

enum class Method { Cblb, FullBootstrap };

const char* to_string(Method m);

struct TimingRecord {
  Method method = Method::Cblb;
  std::string estimator;
  Index n = 0;
  Index b = 0;
  Index s = 0;
  Index r = 0;
  int repetition = 0;
  double fit_seconds = 0.0;
  double resample_seconds = 0.0;
  double total_seconds = 0.0;
};

struct BenchmarkOptions {
  int repetitions = 3;
  bool include_full_bootstrap = true;
  unsigned workers = 1;
};

/// Runs cBLB and the no-refit full bootstrap with the same seed `repetitions`
/// times each, after one untimed warm-up per method. Records come out
/// repetition-major: (cblb, full_bootstrap) for repetition 0, then 1, ...
std::vector<TimingRecord> benchmark(const EstimatorPlugin& plugin, const Dataset& d,
                                    const CBLBConfig& cfg, const BenchmarkOptions& opts = {});

struct ScalingFit {
  double exponent = 0.0;   // slope of log(seconds) on log(n)
  double intercept = 0.0;
  int grid_points = 0;
};

/// Least-squares slope of log(median total_seconds) against log(n) over the
/// records of one method. Throws Error(InsufficientGrid) with fewer than four
/// distinct n.
ScalingFit scaling_fit(const std::vector<TimingRecord>& records, Method method);

/// Same on log(median fit_seconds).
ScalingFit fit_phase_scaling(const std::vector<TimingRecord>& records, Method method);

/// Synthetic plugin whose fit costs `work` passes over all m^2 unit pairs of
/// the bag. Contributions are the outcomes.
EstimatorPlugin quadratic_cost_plugin(int work = 1);

/// Synthetic plugin with O(m) fit cost. Contributions are the outcomes.
EstimatorPlugin constant_cost_plugin();

}  // namespace kcblb
