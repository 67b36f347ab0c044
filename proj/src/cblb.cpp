#include "kcblb/cblb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "kcblb/error.hpp"
#include "kcblb/parallel.hpp"

namespace kcblb {

namespace {

enum StreamTag : std::uint64_t { kPartition = 1, kFit = 2, kResample = 3 };

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double sample_sd(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<std::vector<Index>> partition(RngStream& rng, Index n, Index b, Index s) {
  if (b < 1 || s < 1 || s * b > n)
    throw Error(ErrorCode::ConfigInfeasible, "partition: need s*b <= n with s, b >= 1 (n=" +
                                                 std::to_string(n) + ", b=" + std::to_string(b) +
                                                 ", s=" + std::to_string(s) + ")");
  const auto perm = random_permutation(rng, n);
  std::vector<std::vector<Index>> blocks(static_cast<std::size_t>(s));
  for (Index k = 0; k < s; ++k) {
    const auto first = perm.begin() + static_cast<std::ptrdiff_t>(k * b);
    blocks[static_cast<std::size_t>(k)].assign(first, first + static_cast<std::ptrdiff_t>(b));
  }
  return blocks;
}

double replicate(const Contribution& contributions, std::span<const std::int64_t> counts,
                 std::int64_t n) {
  if (static_cast<Index>(counts.size()) != contributions.size())
    throw Error(ErrorCode::DimensionMismatch, "replicate: counts and contributions differ in length");
  const std::int64_t total = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
  if (total != n)
    throw Error(ErrorCode::CountSumMismatch,
                "replicate: counts sum to " + std::to_string(total) + ", expected " + std::to_string(n));
  double acc = 0.0;
  for (std::size_t a = 0; a < counts.size(); ++a)
    if (counts[a] != 0) acc += static_cast<double>(counts[a]) * contributions[static_cast<Index>(a)];
  return acc / static_cast<double>(n);
}

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "empirical_quantile: no values");
  const auto r = static_cast<double>(values.size());
  // The small offset keeps q*r that is integral in exact arithmetic from
  // rounding up a whole rank.
  auto k = static_cast<std::size_t>(std::ceil(q * r - 1e-9));
  k = std::clamp<std::size_t>(k, 1, values.size());
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k - 1), values.end());
  return values[k - 1];
}

CblbRun run_cblb(const Dataset& d, const EstimatorPlugin& plugin, const CBLBConfig& cfg,
                 unsigned workers) {
  cfg.validate();
  if (cfg.n_total != d.n())
    throw Error(ErrorCode::ConfigInfeasible, "run_cblb: config n_total " + std::to_string(cfg.n_total) +
                                                 " != dataset size " + std::to_string(d.n()));
  const auto start = Clock::now();
  const Index s = cfg.n_bags;
  const Index b = cfg.bag_size;
  const Index r = cfg.n_replicates;
  const auto n = static_cast<std::int64_t>(cfg.n_total);

  RngStream part_rng(cfg.seed, {kPartition});
  CblbRun run;
  run.replicates.bags = partition(part_rng, cfg.n_total, b, s);
  run.replicates.values.resize(s, r);
  run.replicates.bag_estimates.resize(s);
  run.replicates.contributions.resize(static_cast<std::size_t>(s));
  run.bag_fit_seconds.assign(static_cast<std::size_t>(s), 0.0);
  std::vector<double> resample_seconds(static_cast<std::size_t>(s), 0.0);
  std::vector<std::pair<double, double>> quantiles(static_cast<std::size_t>(s));
  std::vector<double> bag_sd(static_cast<std::size_t>(s));

  parallel_for(static_cast<std::size_t>(s), workers, [&](std::size_t k) {
    const auto kk = static_cast<Index>(k);
    const auto fit_start = Clock::now();
    Contribution theta;
    try {
      const Dataset bag = d.subset(run.replicates.bags[k]);
      RngStream fit_rng(cfg.seed, {kFit, static_cast<std::uint64_t>(k)});
      theta = plugin.fit_contribute(bag, fit_rng);
      validate_contribution(theta, b);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::BagFailure,
                  "bag " + std::to_string(k) + " (" + plugin.name + "): " + e.what());
    }
    run.bag_fit_seconds[k] = seconds_since(fit_start);

    const auto resample_start = Clock::now();
    std::vector<double> reps(static_cast<std::size_t>(r));
    for (Index l = 0; l < r; ++l) {
      RngStream rep_rng(cfg.seed, {kResample, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(l)});
      const auto counts = multinomial_draw(rep_rng, n, b);
      reps[static_cast<std::size_t>(l)] = replicate(theta, counts, n);
      run.replicates.values(kk, l) = reps[static_cast<std::size_t>(l)];
    }
    quantiles[k] = {empirical_quantile(reps, cfg.alpha / 2.0),
                    empirical_quantile(reps, 1.0 - cfg.alpha / 2.0)};
    bag_sd[k] = sample_sd(run.replicates.values.row(kk).transpose());
    run.replicates.bag_estimates[kk] = theta.mean();
    run.replicates.contributions[k] = std::move(theta);
    resample_seconds[k] = seconds_since(resample_start);
  });

  auto& out = run.interval;
  out.per_bag_quantiles = quantiles;
  double lo = 0.0;
  double hi = 0.0;
  double se = 0.0;
  for (Index k = 0; k < s; ++k) {
    lo += quantiles[static_cast<std::size_t>(k)].first;
    hi += quantiles[static_cast<std::size_t>(k)].second;
    se += bag_sd[static_cast<std::size_t>(k)];
  }
  const auto sd = static_cast<double>(s);
  out.lower = lo / sd;
  out.upper = hi / sd;
  out.se = se / sd;
  out.point_estimate = run.replicates.bag_estimates.mean();
  run.fit_seconds = std::accumulate(run.bag_fit_seconds.begin(), run.bag_fit_seconds.end(), 0.0);
  run.resample_seconds = std::accumulate(resample_seconds.begin(), resample_seconds.end(), 0.0);
  out.wall_time_seconds = seconds_since(start);
  return run;
}

CblbRun run_full_bootstrap(const Dataset& d, const EstimatorPlugin& plugin, Index r, double alpha,
                           std::uint64_t seed) {
  CBLBConfig cfg;
  cfg.n_total = d.n();
  cfg.bag_size = d.n();
  cfg.n_bags = 1;
  cfg.n_replicates = r;
  cfg.alpha = alpha;
  cfg.seed = seed;
  return run_cblb(d, plugin, cfg, 1);
}

NormalityDiagnostic normality_check(const ReplicateSet& rep, Index bag, Index n) {
  if (bag < 0 || bag >= rep.values.rows())
    throw Error(ErrorCode::InvalidArgument, "normality_check: bag index out of range");
  const Contribution& theta = rep.contributions[static_cast<std::size_t>(bag)];
  const double mean = theta.mean();
  const double var = (theta.array() - mean).square().mean();
  if (!(var > 0.0)) throw Error(ErrorCode::ZeroVariance, "normality_check: contributions are constant");

  NormalityDiagnostic out;
  out.sigma = std::sqrt(var);
  const Index r = rep.values.cols();
  std::vector<double> z(static_cast<std::size_t>(r));
  const double scale = std::sqrt(static_cast<double>(n)) / out.sigma;
  for (Index l = 0; l < r; ++l)
    z[static_cast<std::size_t>(l)] = scale * (rep.values(bag, l) - rep.bag_estimates[bag]);
  std::sort(z.begin(), z.end());

  const boost::math::normal_distribution<double> standard;
  const auto rr = static_cast<double>(r);
  double ks = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double cdf = boost::math::cdf(standard, z[i]);
    ks = std::max({ks, static_cast<double>(i + 1) / rr - cdf, cdf - static_cast<double>(i) / rr});
  }
  out.ks_distance = ks;
  out.threshold = 1.63 / std::sqrt(rr);
  out.pass = ks <= out.threshold;
  return out;
}

}  // namespace kcblb
