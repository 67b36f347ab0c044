#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace kcblb {

/// Counter-based random stream. The key is a hash of (seed, stream ids); the
/// i-th output is a bijective mix of key + i * golden-gamma (SplitMix64), so a
/// stream can be reconstructed from its ids alone on any thread or platform.
///
/// Satisfies UniformRandomBitGenerator so Boost.Random distributions can use it.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);
  RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> stream_ids);

  /// Child stream keyed by (this key, id). Does not advance this stream.
  RngStream substream(std::uint64_t id) const;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform on {0, ..., bound - 1}.
  std::uint64_t below(std::uint64_t bound);
  std::int64_t binomial(std::int64_t trials, double p);

  std::uint64_t key() const { return key_; }

 private:
  struct FromKey {};
  RngStream(FromKey, std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Counts (M_1..M_b) ~ Multinomial(n; 1/b, ..., 1/b) by sequential conditional
/// binomials. Always sums to n exactly.
std::vector<std::int64_t> multinomial_draw(RngStream& rng, std::int64_t n, std::int64_t b);

/// Uniformly random permutation of 0..n-1 (Fisher-Yates).
std::vector<Eigen::Index> random_permutation(RngStream& rng, Eigen::Index n);

}  // namespace kcblb
