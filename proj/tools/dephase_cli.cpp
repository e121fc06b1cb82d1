#include <iostream>

#include <CLI11.hpp>

#include "dephase/commands.hpp"

int main(int argc, char** argv) {
  using namespace dephase;

  CLI::App app{"Dephasing channels, entanglement timescales and Monte Carlo checks for two- and three-qubit states"};
  app.require_subcommand(1);

  CommandOptions opt;
  std::string format, convention;
  std::uint64_t seed = 0;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", opt.config_path, "Run configuration file");
    if (needs_config) c->required();
    sub->add_option("--out", opt.out_dir, "Output directory (overrides output.dir)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", seed, "Seed for Monte Carlo and coefficient draws");
    sub->add_option("--convention", convention, "Concurrence convention: c, c2 or both")->check(CLI::IsMember({"c", "c2", "both"}));
  };

  auto* run = app.add_subcommand("run", "Evolve one state and emit trajectories, timescales and the audit");
  common(run, true);
  run->add_flag("--plots", opt.plots, "Also write coherence.svg and concurrence.svg");

  auto* verify = app.add_subcommand("verify", "Compare the channel against the stochastic-field Monte Carlo average");
  common(verify, true);
  verify->add_flag("--force-informational", opt.force_informational, "Run even where equivalence is not established");

  auto* tables = app.add_subcommand("paper-tables", "Regenerate closed-form checks, timescale tables and the inequality audit");
  common(tables, false);

  auto* sweep = app.add_subcommand("sweep", "Audit over coefficient draws and rate scales");
  common(sweep, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_status::kParse;
  }

  if (!format.empty()) opt.format = format == "csv" ? OutputFormat::Csv : OutputFormat::Json;
  if (!convention.empty()) opt.convention = parse_convention(convention);
  for (auto* sub : {run, verify, tables, sweep})
    if (sub->count("--seed")) opt.seed = seed;

  if (run->parsed()) return cmd_run(opt, std::cout, std::cerr);
  if (verify->parsed()) return cmd_verify(opt, std::cout, std::cerr);
  if (tables->parsed()) return cmd_paper_tables(opt, std::cout, std::cerr);
  return cmd_sweep(opt, std::cout, std::cerr);
}
