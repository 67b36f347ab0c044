#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kcblb/commands.hpp"
#include "kcblb/config.hpp"
#include "kcblb/error.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal bag of little bootstraps for kernel causal estimators"};
  app.require_subcommand(1);

  std::string config_path;
  kcblb::CommandOptions opts;
  unsigned workers = 0;
  std::string output_dir;

  for (const char* name : {"simulate", "timing", "analyze"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--workers", workers, "worker threads (default: all cores; timing: 1)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--output-dir", output_dir, "overrides output_dir from the config");
    sub->add_flag("--no-wall-time", opts.no_wall_time, "write 0 in every seconds column");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  if (workers > 0) opts.workers = workers;
  if (!output_dir.empty()) opts.output_dir = output_dir;

  kcblb::RunConfig cfg;
  try {
    cfg = kcblb::load_run_config(config_path);
    if (command != kcblb::to_string(cfg.command)) {
      std::cerr << "error: " << config_path << " is a '" << kcblb::to_string(cfg.command)
                << "' config but the '" << command << "' command was requested\n";
      return kExitConfig;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    for (const auto& path : kcblb::run_command(cfg, opts)) std::cout << path.string() << '\n';
  } catch (const kcblb::Error& e) {
    std::cerr << "error [" << kcblb::to_string(e.code()) << "]: " << e.what() << '\n';
    return e.code() == kcblb::ErrorCode::ConfigError ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
