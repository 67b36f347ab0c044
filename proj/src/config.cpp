#include "kcblb/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kcblb/error.hpp"

namespace kcblb {

using nlohmann::json;

const char* to_string(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Timing: return "timing";
    case Command::Analyze: return "analyze";
  }
  return "?";
}

const char* to_string(EstimatorKind e) {
  switch (e) {
    case EstimatorKind::Minimax: return "minimax";
    case EstimatorKind::Dml: return "dml";
    case EstimatorKind::AolValue: return "aol_value";
    case EstimatorKind::AolCriterion: return "aol_criterion";
    case EstimatorKind::QuadraticCost: return "quadratic_cost";
    case EstimatorKind::ConstantCost: return "constant_cost";
  }
  return "?";
}

const char* to_string(DgpKind g) { return g == DgpKind::Ate ? "ate" : "policy"; }

namespace {

std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

std::string short_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string index_path(const std::string& parent, std::size_t i) {
  return parent + "[" + std::to_string(i) + "]";
}

// Records the source line of every object key and array element while the
// text is streamed through nlohmann's SAX parser. The stream position read
// in each callback is just past the token that triggered it.
class LineTracker : public nlohmann::json_sax<json> {
 public:
  LineTracker(const std::string& text, std::istringstream& stream, std::string source)
      : stream_(stream), source_(std::move(source)) {
    for (std::size_t i = 0; i < text.size(); ++i)
      if (text[i] == '\n') newlines_.push_back(i);
  }

  int line_at(std::size_t offset) const {
    return static_cast<int>(std::upper_bound(newlines_.begin(), newlines_.end(), offset) -
                            newlines_.begin()) + 1;
  }

  std::map<std::string, int> lines{{"", 1}};

  bool null() override { return scalar(); }
  bool boolean(bool) override { return scalar(); }
  bool number_integer(number_integer_t) override { return scalar(); }
  bool number_unsigned(number_unsigned_t) override { return scalar(); }
  bool number_float(number_float_t, const string_t&) override { return scalar(); }
  bool string(string_t&) override { return scalar(); }
  bool binary(binary_t&) override { return scalar(); }

  bool start_object(std::size_t) override {
    open(false);
    return true;
  }
  bool end_object() override { return close(); }
  bool start_array(std::size_t) override {
    open(true);
    return true;
  }
  bool end_array() override { return close(); }

  bool key(string_t& k) override {
    Frame& top = stack_.back();
    if (!top.keys.insert(k).second)
      throw Error(ErrorCode::ConfigError,
                  source_ + ":" + std::to_string(here()) + ": duplicate key '" + join_path(top.path, k) + "'");
    top.key = k;
    lines[join_path(top.path, k)] = here();
    return true;
  }

  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& ex) override {
    std::size_t byte = 0;
    if (const auto* pe = dynamic_cast<const nlohmann::detail::parse_error*>(&ex)) byte = pe->byte;
    const int line = line_at(byte > 0 ? byte - 1 : 0);
    std::string what = ex.what();
    if (const auto p = what.find("syntax error"); p != std::string::npos) what = what.substr(p);
    throw Error(ErrorCode::ConfigError, source_ + ":" + std::to_string(line) + ": invalid JSON: " + what);
  }

 private:
  struct Frame {
    bool is_array = false;
    std::string path;
    std::string key;
    std::size_t index = 0;
    std::set<std::string> keys;
  };

  int here() const {
    const auto pos = static_cast<long long>(stream_.tellg());
    return line_at(pos > 0 ? static_cast<std::size_t>(pos - 1) : 0);
  }

  // Path of the value about to be produced in the current container.
  std::string value_path() {
    if (stack_.empty()) return "";
    Frame& top = stack_.back();
    if (!top.is_array) return join_path(top.path, top.key);
    const std::string p = index_path(top.path, top.index);
    lines[p] = here();
    return p;
  }

  void advance() {
    if (!stack_.empty() && stack_.back().is_array) ++stack_.back().index;
  }

  bool scalar() {
    value_path();
    advance();
    return true;
  }

  void open(bool is_array) {
    Frame f;
    f.is_array = is_array;
    f.path = value_path();
    stack_.push_back(std::move(f));
  }

  bool close() {
    stack_.pop_back();
    advance();
    return true;
  }

  std::istringstream& stream_;
  std::string source_;
  std::vector<std::size_t> newlines_;
  std::vector<Frame> stack_;
};

class Reader {
 public:
  Reader(std::string source, std::map<std::string, int> lines)
      : source_(std::move(source)), lines_(std::move(lines)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    throw Error(ErrorCode::ConfigError, source_ + ":" + std::to_string(line_of(path)) + ": " +
                                            (path.empty() ? msg : "'" + path + "': " + msg));
  }

  int line_of(std::string path) const {
    while (true) {
      if (const auto it = lines_.find(path); it != lines_.end()) return it->second;
      const auto cut = path.find_last_of(".[");
      if (cut == std::string::npos) return 1;
      path.resize(cut);
    }
  }

  void require_object(const json& j, const std::string& path) const {
    if (!j.is_object()) fail(path, "expected an object");
  }

  void check_keys(const json& obj, const std::string& path,
                  std::initializer_list<const char*> allowed) const {
    require_object(obj, path);
    for (const auto& [k, v] : obj.items()) {
      const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; });
      if (!ok) fail(join_path(path, k), "unknown key");
    }
  }

  long integer(const json& j, const std::string& path, long lo, long hi) const {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(hi))
      fail(path, "must be <= " + std::to_string(hi));
    const long v = j.get<long>();
    if (v < lo) fail(path, "must be >= " + std::to_string(lo));
    if (v > hi) fail(path, "must be <= " + std::to_string(hi));
    return v;
  }

  std::uint64_t unsigned64(const json& j, const std::string& path) const {
    if (!j.is_number_integer()) fail(path, "expected a non-negative integer");
    if (!j.is_number_unsigned() && j.get<long long>() < 0) fail(path, "must be >= 0");
    return j.get<std::uint64_t>();
  }

  double number(const json& j, const std::string& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
  }

  double positive(const json& j, const std::string& path) const {
    const double v = number(j, path);
    if (!(v > 0.0)) fail(path, "must be > 0");
    return v;
  }

  double open_unit(const json& j, const std::string& path, double lo, double hi) const {
    const double v = number(j, path);
    if (!(v > lo && v < hi))
      fail(path, "must lie in (" + short_number(lo) + ", " + short_number(hi) + ")");
    return v;
  }

  bool boolean(const json& j, const std::string& path) const {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
  }

  std::string text(const json& j, const std::string& path) const {
    if (!j.is_string()) fail(path, "expected a string");
    auto s = j.get<std::string>();
    if (s.empty()) fail(path, "must not be empty");
    return s;
  }

  template <typename T>
  T choice(const json& j, const std::string& path,
           std::initializer_list<std::pair<const char*, T>> options) const {
    const std::string s = text(j, path);
    std::string names;
    for (const auto& [name, value] : options) {
      if (s == name) return value;
      names += names.empty() ? name : std::string(", ") + name;
    }
    fail(path, "'" + s + "' is not one of: " + names);
  }

  const json& array(const json& j, const std::string& path) const {
    if (!j.is_array()) fail(path, "expected an array");
    return j;
  }

 private:
  std::string source_;
  std::map<std::string, int> lines_;
};

bool has(const json& obj, const char* key) { return obj.contains(key); }

KernelSpec read_kernel(const Reader& rd, const json& j, const std::string& path) {
  rd.require_object(j, path);
  if (!has(j, "family")) rd.fail(path, "missing key 'family'");
  KernelSpec spec;
  spec.family = rd.choice<KernelFamily>(j["family"], join_path(path, "family"),
                                        {{"linear", KernelFamily::Linear},
                                         {"polynomial", KernelFamily::Polynomial},
                                         {"gaussian", KernelFamily::Gaussian}});
  switch (spec.family) {
    case KernelFamily::Linear:
      rd.check_keys(j, path, {"family"});
      break;
    case KernelFamily::Polynomial:
      rd.check_keys(j, path, {"family", "scale", "degree", "nugget"});
      if (has(j, "scale")) spec.scale = rd.positive(j["scale"], join_path(path, "scale"));
      if (has(j, "degree")) spec.degree = static_cast<int>(rd.integer(j["degree"], join_path(path, "degree"), 1, 20));
      break;
    case KernelFamily::Gaussian:
      rd.check_keys(j, path, {"family", "bandwidth", "nugget"});
      if (has(j, "bandwidth")) spec.bandwidth = rd.positive(j["bandwidth"], join_path(path, "bandwidth"));
      break;
  }
  if (has(j, "nugget")) {
    spec.nugget = rd.number(j["nugget"], join_path(path, "nugget"));
    if (spec.nugget < 0.0) rd.fail(join_path(path, "nugget"), "must be >= 0");
  }
  return spec;
}

void read_minimax(const Reader& rd, const json& j, minimax::MinimaxConfig& cfg) {
  const std::string path = "minimax";
  rd.check_keys(j, path, {"kernel", "lambda", "sigma2_treated", "sigma2_control", "intercept"});
  if (has(j, "kernel")) cfg.kernel = read_kernel(rd, j["kernel"], join_path(path, "kernel"));
  if (has(j, "lambda")) cfg.lambda = rd.positive(j["lambda"], join_path(path, "lambda"));
  if (has(j, "sigma2_treated"))
    cfg.sigma2_treated = rd.positive(j["sigma2_treated"], join_path(path, "sigma2_treated"));
  if (has(j, "sigma2_control"))
    cfg.sigma2_control = rd.positive(j["sigma2_control"], join_path(path, "sigma2_control"));
  if (has(j, "intercept")) cfg.intercept = rd.boolean(j["intercept"], join_path(path, "intercept"));
}

void read_dml(const Reader& rd, const json& j, dml::DMLConfig& cfg) {
  const std::string path = "dml";
  rd.check_keys(j, path, {"folds", "svm_cost", "svr_epsilon", "kernel", "propensity_clip", "platt_max_iter"});
  if (has(j, "folds")) cfg.n_folds = static_cast<int>(rd.integer(j["folds"], join_path(path, "folds"), 2, 1000));
  if (has(j, "svm_cost")) cfg.svm_cost = rd.positive(j["svm_cost"], join_path(path, "svm_cost"));
  if (has(j, "svr_epsilon")) {
    cfg.svr_epsilon = rd.number(j["svr_epsilon"], join_path(path, "svr_epsilon"));
    if (cfg.svr_epsilon < 0.0) rd.fail(join_path(path, "svr_epsilon"), "must be >= 0");
  }
  if (has(j, "kernel")) cfg.kernel = read_kernel(rd, j["kernel"], join_path(path, "kernel"));
  if (has(j, "propensity_clip"))
    cfg.propensity_clip = rd.open_unit(j["propensity_clip"], join_path(path, "propensity_clip"), 0.0, 0.5);
  if (has(j, "platt_max_iter"))
    cfg.platt_max_iter = static_cast<int>(rd.integer(j["platt_max_iter"], join_path(path, "platt_max_iter"), 1, 100000));
}

void read_aol(const Reader& rd, const json& j, aol::AolConfig& cfg) {
  const std::string path = "aol";
  rd.check_keys(j, path, {"kernel", "lambda_grid", "huber_delta", "cv_folds", "propensity",
                          "propensity_clip", "svm_cost"});
  if (has(j, "kernel")) cfg.kernel = read_kernel(rd, j["kernel"], join_path(path, "kernel"));
  if (has(j, "lambda_grid")) {
    const std::string p = join_path(path, "lambda_grid");
    const json& arr = rd.array(j["lambda_grid"], p);
    if (arr.empty()) rd.fail(p, "must not be empty");
    cfg.lambda_grid.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) cfg.lambda_grid.push_back(rd.positive(arr[i], index_path(p, i)));
  }
  if (has(j, "huber_delta")) cfg.huber_delta = rd.positive(j["huber_delta"], join_path(path, "huber_delta"));
  if (has(j, "cv_folds")) cfg.cv_folds = static_cast<int>(rd.integer(j["cv_folds"], join_path(path, "cv_folds"), 2, 1000));
  if (has(j, "propensity")) {
    if (j["propensity"].is_null())
      cfg.propensity.reset();
    else
      cfg.propensity = rd.open_unit(j["propensity"], join_path(path, "propensity"), 0.0, 1.0);
  }
  if (has(j, "propensity_clip"))
    cfg.propensity_clip = rd.open_unit(j["propensity_clip"], join_path(path, "propensity_clip"), 0.0, 0.5);
  if (has(j, "svm_cost")) cfg.svm_cost = rd.positive(j["svm_cost"], join_path(path, "svm_cost"));
}

void read_timing(const Reader& rd, const json& j, TimingConfig& cfg) {
  const std::string path = "timing";
  rd.check_keys(j, path, {"n_grid", "repetitions", "work", "include_full_bootstrap"});
  if (has(j, "n_grid")) {
    const std::string p = join_path(path, "n_grid");
    const json& arr = rd.array(j["n_grid"], p);
    if (arr.empty()) rd.fail(p, "must not be empty");
    for (std::size_t i = 0; i < arr.size(); ++i)
      cfg.n_grid.push_back(rd.integer(arr[i], index_path(p, i), 2, 100000000));
  }
  if (has(j, "repetitions"))
    cfg.repetitions = static_cast<int>(rd.integer(j["repetitions"], join_path(path, "repetitions"), 1, 1000));
  if (has(j, "work")) cfg.work = static_cast<int>(rd.integer(j["work"], join_path(path, "work"), 1, 1000000));
  if (has(j, "include_full_bootstrap"))
    cfg.include_full_bootstrap = rd.boolean(j["include_full_bootstrap"], join_path(path, "include_full_bootstrap"));
}

void read_analyze(const Reader& rd, const json& j, AnalyzeConfig& cfg) {
  const std::string path = "analyze";
  rd.check_keys(j, path, {"input_csv", "outcome", "treatment", "covariates", "categorical", "filters"});
  for (const char* key : {"input_csv", "outcome", "treatment"})
    if (!has(j, key)) rd.fail(path, std::string("missing key '") + key + "'");
  cfg.input_csv = rd.text(j["input_csv"], join_path(path, "input_csv"));
  cfg.outcome = rd.text(j["outcome"], join_path(path, "outcome"));
  cfg.treatment = rd.text(j["treatment"], join_path(path, "treatment"));
  if (has(j, "covariates")) {
    const std::string p = join_path(path, "covariates");
    const json& arr = rd.array(j["covariates"], p);
    for (std::size_t i = 0; i < arr.size(); ++i) cfg.covariates.push_back(rd.text(arr[i], index_path(p, i)));
  }
  if (has(j, "categorical")) {
    const std::string p = join_path(path, "categorical");
    const json& arr = rd.array(j["categorical"], p);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string ip = index_path(p, i);
      rd.check_keys(arr[i], ip, {"column", "reference"});
      if (!has(arr[i], "column") || !has(arr[i], "reference")) rd.fail(ip, "needs 'column' and 'reference'");
      cfg.categorical.push_back({rd.text(arr[i]["column"], join_path(ip, "column")),
                                 rd.text(arr[i]["reference"], join_path(ip, "reference"))});
    }
  }
  if (cfg.covariates.empty() && cfg.categorical.empty())
    rd.fail(path, "at least one covariate (numeric or categorical) is required");
  if (has(j, "filters")) {
    const std::string p = join_path(path, "filters");
    const json& arr = rd.array(j["filters"], p);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string ip = index_path(p, i);
      rd.check_keys(arr[i], ip, {"column", "min", "max"});
      if (!has(arr[i], "column")) rd.fail(ip, "missing key 'column'");
      RangeFilter f;
      f.column = rd.text(arr[i]["column"], join_path(ip, "column"));
      if (has(arr[i], "min")) f.min = rd.number(arr[i]["min"], join_path(ip, "min"));
      if (has(arr[i], "max")) f.max = rd.number(arr[i]["max"], join_path(ip, "max"));
      if (!f.min && !f.max) rd.fail(ip, "needs 'min' or 'max'");
      if (f.min && f.max && *f.min > *f.max) rd.fail(ip, "min exceeds max");
      cfg.filters.push_back(std::move(f));
    }
  }
}

RunConfig read_root(const Reader& rd, const json& j) {
  rd.check_keys(j, "", {"command", "estimator", "dgp", "n", "b", "gamma_exponent", "s", "r", "alpha",
                        "seed", "replications", "tau", "output_dir", "record_wall_time", "minimax",
                        "dml", "aol", "timing", "analyze"});
  for (const char* key : {"command", "estimator", "r", "seed"})
    if (!has(j, key)) rd.fail("", std::string("missing key '") + key + "'");

  RunConfig cfg;
  cfg.command = rd.choice<Command>(j["command"], "command",
                                   {{"simulate", Command::Simulate},
                                    {"timing", Command::Timing},
                                    {"analyze", Command::Analyze}});
  cfg.estimator = rd.choice<EstimatorKind>(j["estimator"], "estimator",
                                           {{"minimax", EstimatorKind::Minimax},
                                            {"dml", EstimatorKind::Dml},
                                            {"aol_value", EstimatorKind::AolValue},
                                            {"aol_criterion", EstimatorKind::AolCriterion},
                                            {"quadratic_cost", EstimatorKind::QuadraticCost},
                                            {"constant_cost", EstimatorKind::ConstantCost}});
  const bool synthetic =
      cfg.estimator == EstimatorKind::QuadraticCost || cfg.estimator == EstimatorKind::ConstantCost;
  if (synthetic && cfg.command != Command::Timing)
    rd.fail("estimator", "synthetic cost plugins are only available to the timing command");

  if (has(j, "dgp")) {
    if (cfg.command == Command::Analyze) rd.fail("dgp", "not allowed for analyze");
    cfg.dgp = rd.choice<DgpKind>(j["dgp"], "dgp", {{"ate", DgpKind::Ate}, {"policy", DgpKind::Policy}});
  } else if (cfg.command == Command::Simulate) {
    rd.fail("", "missing key 'dgp'");
  }
  if (cfg.command == Command::Simulate) {
    const bool ate_estimator = cfg.estimator == EstimatorKind::Minimax || cfg.estimator == EstimatorKind::Dml;
    if (cfg.estimator == EstimatorKind::AolCriterion)
      rd.fail("estimator", "aol_criterion has no known truth, so it cannot be simulated for coverage");
    if (ate_estimator && *cfg.dgp != DgpKind::Ate)
      rd.fail("dgp", std::string(to_string(cfg.estimator)) + " targets the ATE and needs dgp 'ate'");
    if (cfg.estimator == EstimatorKind::AolValue && *cfg.dgp != DgpKind::Policy)
      rd.fail("dgp", "aol_value needs dgp 'policy'");
  }

  if (has(j, "n")) {
    if (cfg.command == Command::Analyze) rd.fail("n", "not allowed for analyze; n is the number of usable rows");
    cfg.n = rd.integer(j["n"], "n", 2, 100000000);
  }
  if (has(j, "b") == has(j, "gamma_exponent")) rd.fail("", "exactly one of 'b' and 'gamma_exponent' is required");
  if (has(j, "b")) cfg.b = rd.integer(j["b"], "b", 1, kMaxBagSize);
  if (has(j, "gamma_exponent")) {
    cfg.gamma_exponent = rd.number(j["gamma_exponent"], "gamma_exponent");
    if (!(*cfg.gamma_exponent > 0.0 && *cfg.gamma_exponent < 1.0))
      rd.fail("gamma_exponent", "must lie in (0, 1)");
  }
  if (has(j, "s")) cfg.s = rd.integer(j["s"], "s", 1, 100000000);
  cfg.r = rd.integer(j["r"], "r", 2, 100000000);
  if (has(j, "alpha")) cfg.alpha = rd.open_unit(j["alpha"], "alpha", 0.0, 1.0);
  cfg.seed = rd.unsigned64(j["seed"], "seed");

  if (has(j, "replications")) {
    if (cfg.command != Command::Simulate) rd.fail("replications", "only used by simulate");
    cfg.replications = rd.integer(j["replications"], "replications", 1, 1000000);
  } else if (cfg.command == Command::Simulate) {
    rd.fail("", "missing key 'replications'");
  }
  if (has(j, "tau")) {
    if (!cfg.dgp || *cfg.dgp != DgpKind::Ate) rd.fail("tau", "only used with dgp 'ate'");
    cfg.tau = rd.number(j["tau"], "tau");
  }
  if (has(j, "output_dir")) cfg.output_dir = rd.text(j["output_dir"], "output_dir");
  if (has(j, "record_wall_time")) cfg.record_wall_time = rd.boolean(j["record_wall_time"], "record_wall_time");

  if (has(j, "minimax")) read_minimax(rd, j["minimax"], cfg.minimax);
  if (has(j, "dml")) read_dml(rd, j["dml"], cfg.dml);
  if (has(j, "aol")) read_aol(rd, j["aol"], cfg.aol);

  if (has(j, "timing")) {
    if (cfg.command != Command::Timing) rd.fail("timing", "only used by the timing command");
    read_timing(rd, j["timing"], cfg.timing);
  }
  if (has(j, "analyze")) {
    if (cfg.command != Command::Analyze) rd.fail("analyze", "only used by the analyze command");
    read_analyze(rd, j["analyze"], cfg.analyze);
  } else if (cfg.command == Command::Analyze) {
    rd.fail("", "missing key 'analyze'");
  }

  if (cfg.command == Command::Simulate && !cfg.n) rd.fail("", "missing key 'n'");
  if (cfg.command == Command::Timing && !cfg.n && cfg.timing.n_grid.empty())
    rd.fail("", "timing needs 'n' or 'timing.n_grid'");
  if (cfg.command == Command::Timing && cfg.timing.n_grid.empty()) cfg.timing.n_grid = {*cfg.n};
  if (cfg.command == Command::Timing && !cfg.dgp) cfg.dgp = DgpKind::Ate;

  // Feasibility for every data size known up front.
  std::vector<long> sizes;
  if (cfg.command == Command::Simulate) sizes.push_back(*cfg.n);
  if (cfg.command == Command::Timing) sizes = cfg.timing.n_grid;
  for (long n : sizes) {
    try {
      cfg.cblb_for(n, cfg.seed);
    } catch (const Error& e) {
      rd.fail(has(j, "b") ? "b" : "gamma_exponent", e.what());
    }
    if (cfg.command == Command::Timing && cfg.timing.include_full_bootstrap && !synthetic &&
        n > kMaxBagSize)
      rd.fail("timing", "full bootstrap with a kernel estimator needs n <= " + std::to_string(kMaxBagSize));
  }
  return cfg;
}

}  // namespace

CBLBConfig RunConfig::cblb_for(long n_units, std::uint64_t run_seed) const {
  const std::string where = " (n=" + std::to_string(n_units) + ")";
  long bag = 0;
  if (b) {
    bag = *b;
  } else {
    bag = std::lround(std::pow(static_cast<double>(n_units), *gamma_exponent));
  }
  if (bag < 1) throw Error(ErrorCode::ConfigError, "bag size must be >= 1" + where);
  if (bag > kMaxBagSize)
    throw Error(ErrorCode::ConfigError,
                "bag size " + std::to_string(bag) + " exceeds the cap " + std::to_string(kMaxBagSize) + where);
  const long bags = s ? *s : n_units / bag;
  if (bags < 1 || bags * bag > n_units)
    throw Error(ErrorCode::ConfigError, "s*b = " + std::to_string(bags) + "*" + std::to_string(bag) +
                                            " does not fit in n" + where);
  CBLBConfig out;
  out.n_total = n_units;
  out.bag_size = bag;
  out.n_bags = bags;
  out.n_replicates = r;
  out.alpha = alpha;
  out.seed = run_seed;
  return out;
}

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  std::istringstream stream(text);
  LineTracker tracker(text, stream, source);
  json::sax_parse(stream, &tracker);
  const json doc = json::parse(text);
  Reader rd(source, std::move(tracker.lines));
  return read_root(rd, doc);
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  RunConfig cfg = parse_run_config(buf.str(), path);
  if (cfg.command == Command::Analyze) {
    const std::filesystem::path input(cfg.analyze.input_csv);
    if (input.is_relative())
      cfg.analyze.input_csv = (std::filesystem::path(path).parent_path() / input).string();
  }
  return cfg;
}

}  // namespace kcblb
