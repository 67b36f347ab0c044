#include "kcblb/rng.hpp"

#include <numeric>

#include <boost/random/binomial_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "kcblb/error.hpp"

namespace kcblb {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t combine(std::uint64_t key, std::uint64_t id) {
  return mix64(key ^ (mix64(id + kGolden) + 0x632be59bd9b4e019ULL));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : key_(combine(mix64(seed), stream_id)) {}

RngStream::RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> stream_ids)
    : key_(mix64(seed)) {
  for (auto id : stream_ids) key_ = combine(key_, id);
}

RngStream RngStream::substream(std::uint64_t id) const { return RngStream(FromKey{}, combine(key_, id)); }

RngStream::result_type RngStream::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double RngStream::normal() {
  boost::random::normal_distribution<double> dist(0.0, 1.0);
  return dist(*this);
}

std::uint64_t RngStream::below(std::uint64_t bound) {
  boost::random::uniform_int_distribution<std::uint64_t> dist(0, bound - 1);
  return dist(*this);
}

std::int64_t RngStream::binomial(std::int64_t trials, double p) {
  if (trials <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  boost::random::binomial_distribution<std::int64_t, double> dist(trials, p);
  return dist(*this);
}

std::vector<std::int64_t> multinomial_draw(RngStream& rng, std::int64_t n, std::int64_t b) {
  if (b < 1) throw Error(ErrorCode::InvalidArgument, "multinomial_draw: b must be >= 1");
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "multinomial_draw: n must be >= 0");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(b), 0);
  std::int64_t remaining = n;
  for (std::int64_t a = 0; a + 1 < b && remaining > 0; ++a) {
    const double p = 1.0 / static_cast<double>(b - a);
    const std::int64_t m = rng.binomial(remaining, p);
    counts[static_cast<std::size_t>(a)] = m;
    remaining -= m;
  }
  counts.back() += remaining;
  return counts;
}

std::vector<Eigen::Index> random_permutation(RngStream& rng, Eigen::Index n) {
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  return perm;
}

}  // namespace kcblb
