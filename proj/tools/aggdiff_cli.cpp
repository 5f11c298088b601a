#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "aggdiff/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"aggdiff: radial aggregation-diffusion experiments"};
  app.require_subcommand(1);
  std::string config;
  std::string out;
  int threads = 0;
  for (const char* name : {"simulate", "erc-check", "decompose", "curve-analyze", "assumptions"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides output_dir)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  }
  CLI11_PARSE(app, argc, argv);

  const std::string cmd = app.get_subcommands().front()->get_name();
  aggdiff::cli::Overrides ov;
  if (!out.empty()) ov.out = out;
  if (threads > 0) ov.threads = threads;

  // the subcommand must agree with the config's command
  try {
    const auto c = aggdiff::parse_config(aggdiff::io::read_text(config));
    if (c.command != cmd) {
      std::cerr << config << ": config command is '" << c.command << "', invoked as '" << cmd << "'\n";
      return aggdiff::cli::kBadConfig;
    }
  } catch (const std::exception&) {
    // reported with diagnostics by run_command
  }
  return aggdiff::cli::run_command(config, ov, std::cout, std::cerr);
}
