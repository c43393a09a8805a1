// kamtorus: straighten, sweep, transport, forced, verify.

#include <CLI11.hpp>

#include <iostream>

#include "kamtorus/experiment.hpp"

namespace cli = kamtorus::cli;

int main(int argc, char** argv) {
  CLI::App app{"KAM straightening of vector fields on tori"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int threads = 1;
  std::uint64_t seed = 0;

  for (const char* name : {"straighten", "sweep", "transport", "forced", "verify"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides KAMTORUS_OUT and the config)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "random seed (overrides the config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kExitConfig;
  }

  const auto* sub = app.get_subcommands().front();
  cli::RunOptions options;
  options.threads = threads;
  if (!out_dir.empty()) options.out = out_dir;
  if (sub->count("--seed")) options.seed = seed;

  kamtorus::io::Json config;
  try {
    config = kamtorus::io::read_json(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cli::kExitConfig;
  }
  return cli::run_command(sub->get_name(), config, options, std::cerr);
}
