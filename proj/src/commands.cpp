#include "kcblb/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "kcblb/csv.hpp"
#include "kcblb/dgp.hpp"
#include "kcblb/error.hpp"
#include "kcblb/parallel.hpp"
#include "kcblb/plugins.hpp"
#include "kcblb/timing.hpp"

namespace kcblb {

namespace {

enum StreamTag : std::uint64_t { kData = 11, kRun = 12 };

namespace fs = std::filesystem;

std::string fmt(double v) { return csv::format_double(v); }
std::string fmt(long v) { return std::to_string(v); }

fs::path output_dir(const RunConfig& cfg, const CommandOptions& opts) {
  fs::path dir = opts.output_dir ? *opts.output_dir : cfg.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

bool keep_time(const RunConfig& cfg, const CommandOptions& opts) {
  return cfg.record_wall_time && !opts.no_wall_time;
}

Dataset draw(const RunConfig& cfg, RngStream& rng, long n) {
  if (cfg.dgp && *cfg.dgp == DgpKind::Policy) return dgp::generate_policy(rng, n);
  return dgp::generate_ate(rng, n, cfg.tau);
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

bool is_missing(const std::string& s) { return s.empty() || s == "NA"; }

std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

EstimatorPlugin make_plugin(const RunConfig& cfg) {
  switch (cfg.estimator) {
    case EstimatorKind::Minimax: return minimax_plugin(cfg.minimax);
    case EstimatorKind::Dml: return dml_plugin(cfg.dml);
    case EstimatorKind::AolValue: return aol_plugin(cfg.aol, aol::Target::Value);
    case EstimatorKind::AolCriterion: return aol_plugin(cfg.aol, aol::Target::Criterion);
    case EstimatorKind::QuadraticCost: return quadratic_cost_plugin(cfg.timing.work);
    case EstimatorKind::ConstantCost: return constant_cost_plugin();
  }
  throw Error(ErrorCode::ConfigError, "unknown estimator");
}

std::vector<CoverageRow> simulate(const RunConfig& cfg, unsigned workers) {
  if (!cfg.n || !cfg.dgp) throw Error(ErrorCode::ConfigError, "simulate needs n and dgp");
  const EstimatorPlugin plugin = make_plugin(cfg);
  const double truth = *cfg.dgp == DgpKind::Ate ? dgp::ate_truth(cfg.tau).true_value
                                                : dgp::policy_truth().true_value;
  const auto reps = static_cast<std::size_t>(cfg.replications);
  std::vector<CoverageRow> rows(reps);
  // Replications are the outer unit of parallelism; a single replication
  // spreads its bags instead.
  const unsigned inner = reps == 1 ? workers : 1;
  parallel_for(reps, workers, [&](std::size_t j) {
    RngStream data_rng(cfg.seed, {kData, static_cast<std::uint64_t>(j)});
    const Dataset d = draw(cfg, data_rng, *cfg.n);
    const CBLBConfig cb = cfg.cblb_for(*cfg.n, RngStream(cfg.seed, {kRun, static_cast<std::uint64_t>(j)}).key());
    const CblbRun run = run_cblb(d, plugin, cb, inner);
    CoverageRow& row = rows[j];
    row.replication = static_cast<long>(j) + 1;
    row.estimator = plugin.name;
    row.s = cb.n_bags;
    row.b = cb.bag_size;
    row.n = cb.n_total;
    row.lower = run.interval.lower;
    row.upper = run.interval.upper;
    row.point = run.interval.point_estimate;
    row.truth = truth;
    row.covered = row.lower <= truth && truth <= row.upper;
    row.seconds = run.interval.wall_time_seconds;
  });
  return rows;
}

std::vector<std::size_t> zipplot_order(const std::vector<CoverageRow>& rows) {
  std::vector<double> score(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double half = 0.5 * (rows[i].upper - rows[i].lower);
    const double off = std::abs(0.5 * (rows[i].lower + rows[i].upper) - rows[i].truth);
    score[i] = half > 0.0 ? off / half : (off > 0.0 ? INFINITY : 0.0);
  }
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
  return order;
}

std::vector<fs::path> cmd_simulate(const RunConfig& cfg, const CommandOptions& opts) {
  const unsigned workers = opts.workers ? *opts.workers : default_workers();
  const auto rows = simulate(cfg, workers);
  const bool timed = keep_time(cfg, opts);
  const fs::path dir = output_dir(cfg, opts);

  const fs::path coverage = dir / "coverage.csv";
  auto out = open_output(coverage);
  csv::write_row(out, {"replication", "estimator", "s", "b", "n", "lower", "upper", "point", "covered",
                       "truth", "seconds"});
  for (const auto& r : rows)
    csv::write_row(out, {fmt(r.replication), r.estimator, fmt(r.s), fmt(r.b), fmt(r.n), fmt(r.lower),
                         fmt(r.upper), fmt(r.point), r.covered ? "1" : "0", fmt(r.truth),
                         fmt(timed ? r.seconds : 0.0)});
  finish(out, coverage);

  const fs::path zip = dir / "zipplot.csv";
  auto zout = open_output(zip);
  csv::write_row(zout, {"rank", "lower", "upper", "covered"});
  long rank = 1;
  for (std::size_t i : zipplot_order(rows))
    csv::write_row(zout, {fmt(rank++), fmt(rows[i].lower), fmt(rows[i].upper), rows[i].covered ? "1" : "0"});
  finish(zout, zip);
  return {coverage, zip};
}

std::vector<fs::path> cmd_timing(const RunConfig& cfg, const CommandOptions& opts) {
  const EstimatorPlugin plugin = make_plugin(cfg);
  BenchmarkOptions bench;
  bench.repetitions = cfg.timing.repetitions;
  bench.include_full_bootstrap = cfg.timing.include_full_bootstrap;
  bench.workers = opts.workers ? *opts.workers : 1;
  const bool timed = keep_time(cfg, opts);
  const fs::path dir = output_dir(cfg, opts);

  std::vector<TimingRecord> records;
  for (long n : cfg.timing.n_grid) {
    RngStream data_rng(cfg.seed, {kData, static_cast<std::uint64_t>(n)});
    const Dataset d = draw(cfg, data_rng, n);
    const auto part = benchmark(plugin, d, cfg.cblb_for(n, cfg.seed), bench);
    records.insert(records.end(), part.begin(), part.end());
  }

  const fs::path path = dir / "timing.csv";
  auto out = open_output(path);
  csv::write_row(out, {"method", "estimator", "n", "b", "s", "r", "repetition", "fit_seconds",
                       "resample_seconds", "total_seconds"});
  for (const auto& rec : records)
    csv::write_row(out, {to_string(rec.method), rec.estimator, fmt(static_cast<long>(rec.n)),
                         fmt(static_cast<long>(rec.b)), fmt(static_cast<long>(rec.s)),
                         fmt(static_cast<long>(rec.r)), fmt(static_cast<long>(rec.repetition)),
                         fmt(timed ? rec.fit_seconds : 0.0), fmt(timed ? rec.resample_seconds : 0.0),
                         fmt(timed ? rec.total_seconds : 0.0)});
  finish(out, path);
  return {path};
}

AnalysisData load_analysis_data(const AnalyzeConfig& cfg) {
  const csv::Table table = csv::read_file(cfg.input_csv);
  auto col = [&](const std::string& name) {
    const long c = table.column(name);
    if (c < 0) throw DataError(ErrorCode::MissingColumn, name, std::nullopt);
    return static_cast<std::size_t>(c);
  };
  const std::size_t y_col = col(cfg.outcome);
  const std::size_t a_col = col(cfg.treatment);
  std::vector<std::size_t> x_cols;
  for (const auto& name : cfg.covariates) x_cols.push_back(col(name));
  std::vector<std::size_t> cat_cols;
  for (const auto& c : cfg.categorical) cat_cols.push_back(col(c.column));
  std::vector<std::size_t> filter_cols;
  for (const auto& f : cfg.filters) filter_cols.push_back(col(f.column));

  struct Row {
    double y;
    int a;
    std::vector<double> x;
    std::vector<std::string> cats;
  };
  std::vector<Row> kept;
  long dropped = 0;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& rec = table.rows[i];
    const std::size_t row_no = i + 1;
    auto field = [&](std::size_t c) { return trim(rec[c]); };
    auto numeric = [&](std::size_t c, const std::string& name) {
      const auto v = parse_number(field(c));
      if (!v) throw DataError(ErrorCode::UnparseableRow, name, row_no);
      return *v;
    };

    bool missing = is_missing(field(y_col)) || is_missing(field(a_col));
    for (std::size_t c : x_cols) missing = missing || is_missing(field(c));
    for (std::size_t c : cat_cols) missing = missing || is_missing(field(c));
    for (std::size_t c : filter_cols) missing = missing || is_missing(field(c));
    if (missing) {
      ++dropped;
      continue;
    }

    Row row;
    row.y = numeric(y_col, cfg.outcome);
    const double a = numeric(a_col, cfg.treatment);
    if (a != 0.0 && a != 1.0) throw DataError(ErrorCode::UnparseableRow, cfg.treatment, row_no);
    row.a = static_cast<int>(a);
    for (std::size_t k = 0; k < x_cols.size(); ++k) row.x.push_back(numeric(x_cols[k], cfg.covariates[k]));
    for (std::size_t c : cat_cols) row.cats.push_back(field(c));

    bool inside = true;
    for (std::size_t k = 0; k < cfg.filters.size(); ++k) {
      const double v = numeric(filter_cols[k], cfg.filters[k].column);
      if (cfg.filters[k].min && v < *cfg.filters[k].min) inside = false;
      if (cfg.filters[k].max && v > *cfg.filters[k].max) inside = false;
    }
    if (!inside) {
      ++dropped;
      continue;
    }
    kept.push_back(std::move(row));
  }
  if (kept.empty()) throw DataError(ErrorCode::EmptyAfterFilter, cfg.input_csv, std::nullopt);

  AnalysisData out;
  out.covariate_names = cfg.covariates;
  std::vector<std::vector<std::string>> levels(cat_cols.size());
  for (std::size_t k = 0; k < cat_cols.size(); ++k) {
    std::set<std::string> seen;
    for (const auto& row : kept) seen.insert(row.cats[k]);
    const auto& ref = cfg.categorical[k].reference;
    if (!seen.count(ref))
      throw Error(ErrorCode::ConfigError, "reference level '" + ref + "' does not occur in column '" +
                                              cfg.categorical[k].column + "'");
    for (const auto& level : seen)
      if (level != ref) {
        levels[k].push_back(level);
        out.covariate_names.push_back(cfg.categorical[k].column + "=" + level);
      }
  }

  const auto n = static_cast<Index>(kept.size());
  const auto p = static_cast<Index>(out.covariate_names.size());
  Dataset& d = out.data;
  d.coding = TreatmentCoding::ZeroOne;
  d.outcomes.resize(n);
  d.treatments.resize(n);
  d.covariates.setZero(n, p);
  for (Index i = 0; i < n; ++i) {
    const Row& row = kept[static_cast<std::size_t>(i)];
    d.outcomes[i] = row.y;
    d.treatments[i] = row.a;
    Index j = 0;
    for (double v : row.x) d.covariates(i, j++) = v;
    for (std::size_t k = 0; k < levels.size(); ++k)
      for (const auto& level : levels[k]) d.covariates(i, j++) = row.cats[k] == level ? 1.0 : 0.0;
  }
  validate_dataset(d, TreatmentCoding::ZeroOne);
  out.n_used = static_cast<long>(n);
  out.n_dropped = dropped;
  return out;
}

std::vector<fs::path> cmd_analyze(const RunConfig& cfg, const CommandOptions& opts) {
  const AnalysisData data = load_analysis_data(cfg.analyze);
  const CBLBConfig cb = cfg.cblb_for(data.n_used, cfg.seed);
  const unsigned workers = opts.workers ? *opts.workers : default_workers();
  const CblbRun run = run_cblb(data.data, make_plugin(cfg), cb, workers);
  const fs::path dir = output_dir(cfg, opts);

  const fs::path path = dir / "analysis.csv";
  auto out = open_output(path);
  csv::write_row(out, {"estimator", "n_used", "n_dropped", "point", "lower", "upper", "se", "seconds"});
  csv::write_row(out, {to_string(cfg.estimator), fmt(data.n_used), fmt(data.n_dropped),
                       fmt(run.interval.point_estimate), fmt(run.interval.lower), fmt(run.interval.upper),
                       fmt(run.interval.se), fmt(keep_time(cfg, opts) ? run.interval.wall_time_seconds : 0.0)});
  finish(out, path);
  return {path};
}

std::vector<fs::path> run_command(const RunConfig& cfg, const CommandOptions& opts) {
  switch (cfg.command) {
    case Command::Simulate: return cmd_simulate(cfg, opts);
    case Command::Timing: return cmd_timing(cfg, opts);
    case Command::Analyze: return cmd_analyze(cfg, opts);
  }
  throw Error(ErrorCode::ConfigError, "unknown command");
}

}  // namespace kcblb
