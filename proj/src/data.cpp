#include "kcblb/data.hpp"

#include <cmath>
#include <string>

#include "kcblb/error.hpp"

namespace kcblb {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::BadTreatmentCode: return "BadTreatmentCode";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NonFiniteObjective: return "NonFiniteObjective";
    case ErrorCode::EmptyArm: return "EmptyArm";
    case ErrorCode::SingleClassFold: return "SingleClassFold";
    case ErrorCode::TooManyFolds: return "TooManyFolds";
    case ErrorCode::ConfigInfeasible: return "ConfigInfeasible";
    case ErrorCode::CountSumMismatch: return "CountSumMismatch";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::InsufficientGrid: return "InsufficientGrid";
    case ErrorCode::BagFailure: return "BagFailure";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnparseableRow: return "UnparseableRow";
    case ErrorCode::EmptyAfterFilter: return "EmptyAfterFilter";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

std::string describe(ErrorCode code, const std::string& column,
                     std::optional<std::size_t> row) {
  std::string msg = std::string(to_string(code)) + "(" + column;
  if (row) msg += ", row " + std::to_string(*row);
  return msg + ")";
}

}  // namespace

DataError::DataError(ErrorCode code, std::string column,
                     std::optional<std::size_t> row)
    : Error(code, describe(code, column, row)),
      column_(std::move(column)),
      row_(row) {}

Dataset Dataset::subset(std::span<const Index> idx) const {
  Dataset out;
  const auto m = static_cast<Index>(idx.size());
  out.outcomes.resize(m);
  out.treatments.resize(m);
  out.covariates.resize(m, p());
  out.coding = coding;
  for (Index i = 0; i < m; ++i) {
    const Index src = idx[static_cast<std::size_t>(i)];
    out.outcomes[i] = outcomes[src];
    out.treatments[i] = treatments[src];
    out.covariates.row(i) = covariates.row(src);
  }
  return out;
}

void validate_dataset(const Dataset& d, TreatmentCoding coding) {
  const Index n = d.outcomes.size();
  if (n < 1) throw DataError(ErrorCode::LengthMismatch, "outcomes", std::nullopt);
  if (d.treatments.size() != n)
    throw DataError(ErrorCode::LengthMismatch, "treatments", std::nullopt);
  if (d.covariates.rows() != n)
    throw DataError(ErrorCode::LengthMismatch, "covariates", std::nullopt);
  if (d.covariates.cols() < 1)
    throw DataError(ErrorCode::LengthMismatch, "covariates", std::nullopt);

  for (Index i = 0; i < n; ++i) {
    if (!std::isfinite(d.outcomes[i]))
      throw DataError(ErrorCode::NonFiniteValue, "outcomes", static_cast<std::size_t>(i));
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d.covariates.cols(); ++j) {
      if (!std::isfinite(d.covariates(i, j)))
        throw DataError(ErrorCode::NonFiniteValue, "covariates[" + std::to_string(j) + "]",
                        static_cast<std::size_t>(i));
    }
  }
  const int lo = coding == TreatmentCoding::ZeroOne ? 0 : -1;
  for (Index i = 0; i < n; ++i) {
    const int t = d.treatments[i];
    if (t != lo && t != 1)
      throw DataError(ErrorCode::BadTreatmentCode, "treatments", static_cast<std::size_t>(i));
  }
}

Dataset to_plus_minus(const Dataset& d) {
  validate_dataset(d, TreatmentCoding::ZeroOne);
  Dataset out = d;
  out.treatments = (2 * d.treatments.array() - 1).matrix();
  out.coding = TreatmentCoding::PlusMinus;
  return out;
}

Dataset to_zero_one(const Dataset& d) {
  validate_dataset(d, TreatmentCoding::PlusMinus);
  Dataset out = d;
  out.treatments = ((d.treatments.array() + 1) / 2).matrix();
  out.coding = TreatmentCoding::ZeroOne;
  return out;
}

void validate_contribution(const Contribution& c, Index expected_size) {
  if (c.size() != expected_size)
    throw Error(ErrorCode::LengthMismatch,
                "contribution length " + std::to_string(c.size()) + " != bag size " +
                    std::to_string(expected_size));
  for (Index i = 0; i < c.size(); ++i) {
    if (!std::isfinite(c[i]))
      throw DataError(ErrorCode::NonFiniteValue, "contribution", static_cast<std::size_t>(i));
  }
}

CBLBConfig CBLBConfig::from_gamma(Index n, double gamma, Index r, double alpha,
                                  std::uint64_t seed) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw Error(ErrorCode::ConfigInfeasible, "gamma_exponent must lie in (0,1)");
  if (n < 1) throw Error(ErrorCode::ConfigInfeasible, "n must be positive");
  CBLBConfig cfg;
  cfg.n_total = n;
  cfg.bag_size = std::max<Index>(1, static_cast<Index>(std::llround(std::pow(static_cast<double>(n), gamma))));
  cfg.n_bags = n / cfg.bag_size;
  cfg.n_replicates = r;
  cfg.alpha = alpha;
  cfg.seed = seed;
  return cfg;
}

void CBLBConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::ConfigInfeasible, msg); };
  if (n_total < 1) fail("n_total must be positive");
  if (bag_size < 1) fail("bag size b must be positive");
  if (n_bags < 1) fail("number of bags s must be at least 1");
  if (n_replicates < 2) fail("number of replicates r must be at least 2");
  if (bag_size > n_total) fail("bag size b exceeds n");
  if (n_bags * bag_size > n_total) fail("s*b exceeds n");
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0,1)");
}

bool CBLBConfig::coarse_quantiles() const {
  return static_cast<double>(n_replicates) * alpha / 2.0 < 1.0;
}

}  // namespace kcblb
