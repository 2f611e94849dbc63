// Command-line runner: stiefelflow run|check|sweep [--config PATH]
// [--set KEY=VALUE]... [--out DIR] [--quiet] [--grid KEY=v1,v2,...]...

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "stiefelflow/cli/commands.hpp"

namespace sf = stiefelflow;
namespace sfc = stiefelflow::cli;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "flat key = value configuration file");
  cmd->add_option("--set", c.overrides, "override one key, KEY=VALUE (repeatable)");
  cmd->add_option("--out", c.out_dir, "output directory (default: $STIEFELFLOW_OUT, then out_dir)");
  cmd->add_flag("--quiet", c.quiet, "suppress console summary");
}

sfc::ScenarioConfig load(const Common& c) {
  sfc::ScenarioConfig cfg;
  if (!c.config_path.empty()) sfc::apply_config_file(cfg, c.config_path);
  for (const auto& kv : c.overrides) sfc::apply_override(cfg, kv);
  return cfg;
}

sfc::CommandOptions options(const Common& c, const sfc::ScenarioConfig& cfg) {
  sfc::CommandOptions o;
  o.quiet = c.quiet;
  if (!c.out_dir.empty()) {
    o.out_dir = c.out_dir;
  } else if (const char* env = std::getenv(sfc::kOutDirEnv); env && *env) {
    o.out_dir = env;
  } else {
    o.out_dir = cfg.out_dir;
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geodesic and extremal flows on Stiefel manifolds"};
  app.require_subcommand(1);

  Common run_opts, check_opts, sweep_opts;
  std::vector<std::string> grid;
  auto* run = app.add_subcommand("run", "integrate a scenario and write trajectory and report");
  add_common(run, run_opts);
  auto* check = app.add_subcommand("check", "evaluate the static identity suite");
  add_common(check, check_opts);
  auto* sweep = app.add_subcommand("sweep", "run a parameter grid and estimate convergence orders");
  add_common(sweep, sweep_opts);
  sweep->add_option("--grid", grid, "grid axis KEY=v1,v2,... (repeatable)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto cfg = load(run_opts);
      return sfc::command_run(cfg, options(run_opts, cfg));
    }
    if (check->parsed()) {
      const auto cfg = load(check_opts);
      return sfc::command_check(cfg, options(check_opts, cfg));
    }
    const auto cfg = load(sweep_opts);
    return sfc::command_sweep(cfg, grid, options(sweep_opts, cfg));
  } catch (const sf::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
