#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "tmcmc/errors.hpp"

int main(int argc, char** argv) {
  using namespace tmcmc::cli;
  CLI::App app{"Transport-map accelerated MCMC"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  RunOptions run;
  std::string run_output;
  std::uint64_t run_seed = 0;
  auto* run_cmd = app.add_subcommand("run", "Run the chains described by a config file");
  run_cmd->add_option("--config", run.config, "Run configuration")->required();
  auto* out_opt = run_cmd->add_option("--output", run_output, "Output directory (overrides [run] output)");
  auto* seed_opt = run_cmd->add_option("--seed", run_seed, "Base seed (overrides [run] seed)");
  run_cmd->add_option("--jobs", run.jobs, "Replicates run concurrently")->check(CLI::PositiveNumber);

  FitmapOptions fit;
  std::string family = "hermite", set_type = "total";
  auto* fit_cmd = app.add_subcommand("fitmap", "Fit a transport map to a sample file");
  fit_cmd->add_option("--samples", fit.samples, "Sample file")->required();
  fit_cmd->add_option("--output", fit.output, "Map file to write")->required();
  auto* fit_config = fit_cmd->add_option("--config", "Config with [basis] and [map] sections")->type_name("TEXT");
  fit_cmd->add_option("--degree", fit.basis.degree, "Polynomial degree");
  fit_cmd->add_option("--family", family, "hermite or monomial");
  fit_cmd->add_option("--set", set_type, "total, nomixed or diagonal");
  fit_cmd->add_option("--k-r", fit.optimizer.k_r, "Regularization weight");

  CompareOptions cmp;
  std::string cmp_output;
  auto* cmp_cmd = app.add_subcommand("compare", "Tabulate efficiency across result directories");
  cmp_cmd->add_option("dirs", cmp.directories, "Result directories")->required();
  cmp_cmd->add_option("--baseline", cmp.baseline, "Baseline method name");
  auto* cmp_out = cmp_cmd->add_option("--output", cmp_output, "Directory for comparison.txt/.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  if (*run_cmd) {
    if (*out_opt) run.output = run_output;
    if (*seed_opt) run.seed = run_seed;
    return cmd_run(run, std::cout, std::cerr);
  }
  if (*fit_cmd) {
    try {
      fit.basis.family = tmcmc::parse_family(family);
      fit.basis.type = tmcmc::parse_set_type(set_type);
    } catch (const tmcmc::Error& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kExitConfig;
    }
    if (*fit_config) fit.config = fit_config->as<std::string>();
    return cmd_fitmap(fit, std::cout, std::cerr);
  }
  if (*cmp_out) cmp.output = cmp_output;
  return cmd_compare(cmp, std::cout, std::cerr);
}
