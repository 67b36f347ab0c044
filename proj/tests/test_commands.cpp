#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "helpers.hpp"
#include "kcblb/commands.hpp"
#include "kcblb/csv.hpp"
#include "kcblb/dgp.hpp"

using namespace kcblb;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("kcblb_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Births-style cohort: 300 usable rows, one low weight and two missing fields.
std::string cohort_csv() {
  RngStream rng(1, 0);
  const Dataset d = dgp::generate_ate(rng, 300);
  std::ostringstream out;
  out << "weight,smoke,age,race\n";
  const char* races[] = {"white", "black", "other"};
  for (Index i = 0; i < d.n(); ++i)
    out << csv::format_double(3000.0 + 100.0 * d.outcomes[i]) << ',' << d.treatments[i] << ','
        << csv::format_double(d.covariates(i, 0)) << ',' << races[i % 3] << '\n';
  out << "200,1,0.5,white\n";
  out << "NA,0,0.1,black\n";
  out << "3100,1,,other\n";
  return out.str();
}

AnalyzeConfig cohort_config(const fs::path& csv_path) {
  AnalyzeConfig a;
  a.input_csv = csv_path.string();
  a.outcome = "weight";
  a.treatment = "smoke";
  a.covariates = {"age"};
  a.categorical = {{"race", "white"}};
  a.filters = {{"weight", 350.0, 6000.0}};
  return a;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(KCBLB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string simulate_config(const fs::path& out) {
  return R"({"command": "simulate", "estimator": "minimax", "dgp": "ate", "n": 400,
    "gamma_exponent": 0.7, "r": 30, "seed": 5, "replications": 4, "output_dir": ")" +
         out.string() + "\"}";
}

std::string timing_config(const fs::path& out) {
  return R"({"command": "timing", "estimator": "constant_cost", "gamma_exponent": 0.7, "r": 20,
    "seed": 6, "timing": {"n_grid": [500, 1000], "repetitions": 2}, "output_dir": ")" +
         out.string() + "\"}";
}

std::string analyze_config(const fs::path& csv_path, const fs::path& out) {
  return R"({"command": "analyze", "estimator": "minimax", "gamma_exponent": 0.7, "r": 50, "seed": 7,
    "analyze": {"input_csv": ")" + csv_path.string() +
         R"(", "outcome": "weight", "treatment": "smoke", "covariates": ["age"],
    "categorical": [{"column": "race", "reference": "white"}],
    "filters": [{"column": "weight", "min": 350, "max": 6000}]}, "output_dir": ")" +
         out.string() + "\"}";
}

}  // namespace

TEST_CASE("analysis data mapping drops and encodes rows") {
  TempDir dir("analysis");
  write_text(dir.path / "cohort.csv", cohort_csv());
  const AnalysisData a = load_analysis_data(cohort_config(dir.path / "cohort.csv"));
  CHECK(a.n_used == 300);
  CHECK(a.n_dropped == 3);
  CHECK(a.covariate_names == std::vector<std::string>{"age", "race=black", "race=other"});
  CHECK(a.data.covariates(0, 1) == 0.0);
  CHECK(a.data.covariates(1, 1) == 1.0);
  CHECK(a.data.covariates(2, 2) == 1.0);
  CHECK(a.data.outcomes.minCoeff() >= 350.0);
}

TEST_CASE("analysis data errors") {
  TempDir dir("analysis_errors");
  const fs::path p = dir.path / "bad.csv";
  write_text(p, "weight,smoke,age,race\n3000,0,1.0,white\n3100,yes,2.0,black\n");
  try {
    load_analysis_data(cohort_config(p));
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(e.code() == ErrorCode::UnparseableRow);
    CHECK(e.column() == "smoke");
    CHECK(e.row() == 2);
  }

  write_text(p, "weight,smoke,age\n3000,0,1.0\n");
  try {
    load_analysis_data(cohort_config(p));
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(e.code() == ErrorCode::MissingColumn);
    CHECK(e.column() == "race");
  }

  write_text(p, "weight,smoke,age,race\n200,0,1.0,white\n7000,1,2.0,black\n");
  CHECK(testing::error_code_of([&] { load_analysis_data(cohort_config(p)); }) == ErrorCode::EmptyAfterFilter);

  write_text(p, "weight,smoke,age,race\n3000,0,1.0,black\n3100,1,2.0,black\n");
  CHECK(testing::error_code_of([&] { load_analysis_data(cohort_config(p)); }) == ErrorCode::ConfigError);

  write_text(p, "weight,smoke,age,race\n3000,2,1.0,white\n");
  CHECK(testing::error_code_of([&] { load_analysis_data(cohort_config(p)); }) == ErrorCode::UnparseableRow);
}

TEST_CASE("zip-plot order ranks by standardized miss") {
  std::vector<CoverageRow> rows(4);
  const double mids[] = {0.0, 0.5, -0.1, 0.1};
  for (std::size_t i = 0; i < 4; ++i) {
    rows[i].replication = static_cast<long>(i + 1);
    rows[i].lower = mids[i] - 0.2;
    rows[i].upper = mids[i] + 0.2;
  }
  CHECK(zipplot_order(rows) == std::vector<std::size_t>{0, 2, 3, 1});
}

TEST_CASE("simulate writes coverage and zip-plot tables that agree") {
  TempDir dir("simulate");
  const RunConfig cfg = parse_run_config(simulate_config(dir.path));
  CommandOptions opts;
  opts.workers = 2;
  const auto paths = cmd_simulate(cfg, opts);
  REQUIRE(paths.size() == 2);
  const csv::Table cov = csv::read_file((dir.path / "coverage.csv").string());
  const csv::Table zip = csv::read_file((dir.path / "zipplot.csv").string());
  REQUIRE(cov.rows.size() == 4);
  REQUIRE(zip.rows.size() == 4);
  CHECK(cov.header == std::vector<std::string>{"replication", "estimator", "s", "b", "n", "lower", "upper", "point",
                                               "covered", "truth", "seconds"});
  std::multiset<std::string> a;
  std::multiset<std::string> b;
  for (const auto& r : cov.rows) a.insert(r[5] + "|" + r[6] + "|" + r[8]);
  for (const auto& r : zip.rows) b.insert(r[1] + "|" + r[2] + "|" + r[3]);
  CHECK(a == b);
  for (const auto& r : cov.rows) {
    CHECK(r[1] == "minimax");
    CHECK(r[9] == "0.80000000000000004");
    const bool covered = std::stod(r[5]) <= 0.8 && 0.8 <= std::stod(r[6]);
    CHECK(r[8] == (covered ? "1" : "0"));
  }
}

TEST_CASE("CLI exit codes") {
  TempDir dir("cli_codes");
  write_text(dir.path / "cohort.csv", cohort_csv());
  write_text(dir.path / "analyze.json", analyze_config(dir.path / "cohort.csv", dir.path / "out"));
  CHECK(run_cli("analyze --config " + (dir.path / "analyze.json").string()) == 0);
  CHECK(fs::exists(dir.path / "out" / "analysis.csv"));

  CHECK(run_cli("analyze") == 2);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("analyze --config " + (dir.path / "missing.json").string()) == 2);
  CHECK(run_cli("simulate --config " + (dir.path / "analyze.json").string()) == 2);
  CHECK(run_cli("analyze --workers 0 --config " + (dir.path / "analyze.json").string()) == 2);
  write_text(dir.path / "broken.json", "{\"command\": \"analyze\",\n}");
  CHECK(run_cli("analyze --config " + (dir.path / "broken.json").string()) == 2);

  write_text(dir.path / "cohort.csv", "weight,smoke,age,race\n3000,yes,1,white\n");
  CHECK(run_cli("analyze --config " + (dir.path / "analyze.json").string()) == 3);
}

TEST_CASE("CLI outputs are byte-identical across runs and worker counts") {
  TempDir dir("cli_determinism");
  write_text(dir.path / "cohort.csv", cohort_csv());
  write_text(dir.path / "simulate.json", simulate_config(dir.path / "unused"));
  write_text(dir.path / "timing.json", timing_config(dir.path / "unused"));
  write_text(dir.path / "analyze.json", analyze_config(dir.path / "cohort.csv", dir.path / "unused"));
  const std::pair<const char*, std::vector<const char*>> commands[] = {
      {"simulate", {"coverage.csv", "zipplot.csv"}},
      {"timing", {"timing.csv"}},
      {"analyze", {"analysis.csv"}},
  };
  for (const auto& [command, files] : commands) {
    const std::string config = (dir.path / (std::string(command) + ".json")).string();
    std::vector<std::string> reference;
    for (const char* workers : {"1", "3", "1"}) {
      const fs::path out = dir.path / (std::string(command) + "_w" + workers + "_" + std::to_string(reference.size()));
      REQUIRE(run_cli(std::string(command) + " --config " + config + " --workers " + workers +
                      " --no-wall-time --output-dir " + out.string()) == 0);
      std::string joined;
      for (const char* f : files) joined += read_text(out / f) + "\x1f";
      if (reference.empty()) reference.push_back(joined);
      CHECK(joined == reference.front());
      CHECK(joined.find('\r') == std::string::npos);
    }
  }
}
