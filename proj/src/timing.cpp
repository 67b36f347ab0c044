#include "kcblb/timing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "kcblb/error.hpp"

namespace kcblb {

const char* to_string(Method m) {
  return m == Method::Cblb ? "cblb" : "full_bootstrap";
}

namespace {

TimingRecord record_of(Method method, const std::string& name, const CBLBConfig& cfg,
                       int repetition, const CblbRun& run) {
  TimingRecord rec;
  rec.method = method;
  rec.estimator = name;
  rec.n = cfg.n_total;
  rec.b = cfg.bag_size;
  rec.s = cfg.n_bags;
  rec.r = cfg.n_replicates;
  rec.repetition = repetition;
  rec.fit_seconds = run.fit_seconds;
  rec.resample_seconds = run.resample_seconds;
  rec.total_seconds = run.interval.wall_time_seconds;
  return rec;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto m = v.size();
  return m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

ScalingFit loglog_fit(const std::vector<TimingRecord>& records, Method method, bool fit_phase) {
  std::map<Index, std::vector<double>> by_n;
  for (const auto& rec : records)
    if (rec.method == method) by_n[rec.n].push_back(fit_phase ? rec.fit_seconds : rec.total_seconds);
  if (by_n.size() < 4)
    throw Error(ErrorCode::InsufficientGrid, "scaling_fit: need at least 4 distinct n, got " +
                                                 std::to_string(by_n.size()));
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& [n, secs] : by_n) {
    const double t = median(secs);
    if (!(t > 0.0))
      throw Error(ErrorCode::InvalidArgument, "scaling_fit: non-positive time at n=" + std::to_string(n));
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(std::log(t));
  }
  const auto m = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  ScalingFit out;
  out.exponent = sxy / sxx;
  out.intercept = my - out.exponent * mx;
  out.grid_points = static_cast<int>(xs.size());
  return out;
}

}  // namespace

std::vector<TimingRecord> benchmark(const EstimatorPlugin& plugin, const Dataset& d,
                                    const CBLBConfig& cfg, const BenchmarkOptions& opts) {
  if (opts.repetitions < 1)
    throw Error(ErrorCode::InvalidArgument, "benchmark: repetitions must be >= 1");
  CBLBConfig full = cfg;
  full.bag_size = cfg.n_total;
  full.n_bags = 1;

  run_cblb(d, plugin, cfg, opts.workers);
  if (opts.include_full_bootstrap) run_cblb(d, plugin, full, 1);

  std::vector<TimingRecord> out;
  for (int rep = 0; rep < opts.repetitions; ++rep) {
    out.push_back(record_of(Method::Cblb, plugin.name, cfg, rep, run_cblb(d, plugin, cfg, opts.workers)));
    if (opts.include_full_bootstrap)
      out.push_back(record_of(Method::FullBootstrap, plugin.name, full, rep,
                              run_full_bootstrap(d, plugin, cfg.n_replicates, cfg.alpha, cfg.seed)));
  }
  return out;
}

ScalingFit scaling_fit(const std::vector<TimingRecord>& records, Method method) {
  return loglog_fit(records, method, false);
}

ScalingFit fit_phase_scaling(const std::vector<TimingRecord>& records, Method method) {
  return loglog_fit(records, method, true);
}

EstimatorPlugin quadratic_cost_plugin(int work) {
  if (work < 1) throw Error(ErrorCode::InvalidArgument, "quadratic_cost_plugin: work must be >= 1");
  return {"quadratic_cost", [work](const Dataset& bag, RngStream&) {
            const Eigen::VectorXd& x = bag.outcomes;
            const Index m = x.size();
            volatile double sink = 0.0;
            for (int w = 0; w < work; ++w) {
              double acc = 0.0;
              for (Index i = 0; i < m; ++i) {
                const double xi = x[i];
                for (Index j = 0; j < m; ++j) acc += xi * x[j];
              }
              sink = sink + acc;
            }
            return Contribution(x);
          }};
}

EstimatorPlugin constant_cost_plugin() {
  return {"constant_cost", [](const Dataset& bag, RngStream&) { return Contribution(bag.outcomes); }};
}

}  // namespace kcblb
