#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kcblb/aol.hpp"
#include "kcblb/dml.hpp"
#include "kcblb/minimax.hpp"

namespace kcblb {

enum class Command { Simulate, Timing, Analyze };
enum class EstimatorKind { Minimax, Dml, AolValue, AolCriterion, QuadraticCost, ConstantCost };
enum class DgpKind { Ate, Policy };

const char* to_string(Command c);
const char* to_string(EstimatorKind e);
const char* to_string(DgpKind g);

/// Largest bag the kernel estimators accept; Gram matrices are dense.
inline constexpr long kMaxBagSize = 20000;

struct CategoricalColumn {
  std::string column;
  std::string reference;
};

struct RangeFilter {
  std::string column;
  std::optional<double> min;  // inclusive
  std::optional<double> max;  // inclusive
};

struct AnalyzeConfig {
  std::string input_csv;
  std::string outcome;
  std::string treatment;
  std::vector<std::string> covariates;  // numeric columns
  std::vector<CategoricalColumn> categorical;
  std::vector<RangeFilter> filters;
};

struct TimingConfig {
  std::vector<long> n_grid;  // falls back to {n}
  int repetitions = 3;
  int work = 1;  // passes over the m^2 pairs for the quadratic_cost plugin
  bool include_full_bootstrap = true;
};

struct RunConfig {
  Command command = Command::Simulate;
  EstimatorKind estimator = EstimatorKind::Minimax;
  std::optional<DgpKind> dgp;
  std::optional<long> n;
  std::optional<long> b;
  std::optional<double> gamma_exponent;
  std::optional<long> s;
  long r = 0;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  long replications = 1;
  double tau = 0.8;
  std::string output_dir = ".";
  bool record_wall_time = true;

  minimax::MinimaxConfig minimax;
  dml::DMLConfig dml;
  aol::AolConfig aol;
  TimingConfig timing;
  AnalyzeConfig analyze;

  /// Bag size and count for a data set of n units: b from `b` or
  /// round(n^gamma), s from `s` or floor(n / b). Throws Error(ConfigError)
  /// when infeasible or b exceeds kMaxBagSize.
  CBLBConfig cblb_for(long n_units, std::uint64_t run_seed) const;
};

/// Parses and validates a JSON config. Unknown keys, wrong types and
/// out-of-range values throw Error(ConfigError) with "<source>:<line>: ..."
/// pointing at the offending key (or the enclosing object for missing keys).
RunConfig parse_run_config(const std::string& text, const std::string& source = "config");

RunConfig load_run_config(const std::string& path);

}  // namespace kcblb
