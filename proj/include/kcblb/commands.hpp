#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kcblb/cblb.hpp"
#include "kcblb/config.hpp"

namespace kcblb {

struct CommandOptions {
  /// Unset: machine parallelism for simulate/analyze, one worker for timing.
  std::optional<unsigned> workers;
  std::optional<std::string> output_dir;
  /// Write 0 in every seconds column so outputs can be compared byte for byte.
  bool no_wall_time = false;
};

EstimatorPlugin make_plugin(const RunConfig& cfg);

struct CoverageRow {
  long replication = 0;  // 1-based
  std::string estimator;
  long s = 0;
  long b = 0;
  long n = 0;
  double lower = 0.0;
  double upper = 0.0;
  double point = 0.0;
  bool covered = false;
  double truth = 0.0;
  double seconds = 0.0;
};

/// Outer replications: fresh DGP draw, then run_cblb. Identical for any worker count.
std::vector<CoverageRow> simulate(const RunConfig& cfg, unsigned workers);

/// Zip-plot order: ascending |midpoint - truth| / half-width, ties by replication.
std::vector<std::size_t> zipplot_order(const std::vector<CoverageRow>& rows);

struct AnalysisData {
  Dataset data;
  long n_used = 0;
  long n_dropped = 0;
  std::vector<std::string> covariate_names;
};

/// Maps the CSV columns to a {0,1}-coded Dataset. Rows with an empty or "NA"
/// mapped field, or outside a filter range, are dropped and counted. Throws
/// DataError(MissingColumn) for an absent column, DataError(UnparseableRow)
/// with the 1-based data row for a bad value, DataError(EmptyAfterFilter)
/// when nothing is left.
AnalysisData load_analysis_data(const AnalyzeConfig& cfg);

/// Each writes its CSV(s) into the output directory and returns the paths.
std::vector<std::filesystem::path> cmd_simulate(const RunConfig& cfg, const CommandOptions& opts);
std::vector<std::filesystem::path> cmd_timing(const RunConfig& cfg, const CommandOptions& opts);
std::vector<std::filesystem::path> cmd_analyze(const RunConfig& cfg, const CommandOptions& opts);

std::vector<std::filesystem::path> run_command(const RunConfig& cfg, const CommandOptions& opts);

}  // namespace kcblb
