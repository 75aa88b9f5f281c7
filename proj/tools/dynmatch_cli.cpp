#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dynmatch/experiment.hpp"

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<unsigned> jobs;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Experiment config (INI or JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--jobs", c.jobs, "Worker threads (0 = all cores)");
  cmd->add_option("--seed", c.seed, "Override the base seed");
}

dynmatch::ExperimentConfig resolve(const Common& c) {
  dynmatch::ExperimentConfig cfg = c.config.empty() ? dynmatch::ExperimentConfig{} : dynmatch::load_config(c.config);
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (c.jobs) cfg.jobs = *c.jobs == 0 ? dynmatch::default_jobs() : *c.jobs;
  if (c.seed) cfg.base_seed = *c.seed;
  cfg.market.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic matching market simulator and analytics"};
  app.require_subcommand(1);

  Common common;
  auto* simulate = app.add_subcommand("simulate", "Simulate policies and write runs.csv / summary.json");
  auto* sweep = app.add_subcommand("sweep", "Same as simulate; the config's [sweep] axes are expanded");
  auto* stationary = app.add_subcommand("stationary", "Solve the stationary pool-size distributions");
  auto* bounds = app.add_subcommand("bounds", "Evaluate the closed-form loss and welfare bounds");
  auto* mixing = app.add_subcommand("mixing", "Estimate the mixing time of the pool-size chains");
  auto* mechanism = app.add_subcommand("mechanism", "Check truthful reporting against deviations");
  for (auto* cmd : {simulate, sweep, stationary, bounds, mixing, mechanism}) add_common(cmd, common);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = resolve(common);
    if (simulate->parsed() || sweep->parsed()) {
      dynmatch::cmd_simulate(cfg, std::cout);
    } else if (stationary->parsed()) {
      dynmatch::cmd_stationary(cfg, std::cout);
    } else if (bounds->parsed()) {
      dynmatch::cmd_bounds(cfg, std::cout);
    } else if (mixing->parsed()) {
      dynmatch::cmd_mixing(cfg, std::cout);
    } else if (mechanism->parsed()) {
      dynmatch::cmd_mechanism(cfg, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
