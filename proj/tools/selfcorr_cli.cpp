// selfcorr: run self-consuming retraining experiments with correction.
//
//   selfcorr run      --config exp.yaml [--set loop.gamma=1] [--out dir] [--seed 7]
//   selfcorr sweep    --config exp.yaml [--late-window 11] [--threads 4]
//   selfcorr bounds   --config exp.yaml
//   selfcorr validate

#include <CLI11.hpp>

#include <iostream>

#include "selfcorr/commands.hpp"

namespace {

void add_common(CLI::App* cmd, selfcorr::CommandOptions& opts) {
  cmd->add_option("--config", opts.config, "Experiment file (YAML)")->required();
  cmd->add_option("--set", opts.sets, "Override a key: section.key=value (repeatable)");
  cmd->add_option("--out", opts.out, "Output directory (overrides output.directory)");
  cmd->add_option("--seed", opts.seed, "Seed (run: loop.seed, sweep: sweep.base_seed)");
  cmd->add_option("--late-window", opts.late_window, "Generations in the summary window");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-consuming generative retraining with correction"};
  app.require_subcommand(1);

  selfcorr::CommandOptions opts;
  auto* run = app.add_subcommand("run", "Run a single loop and write its trajectory CSV");
  auto* sweep = app.add_subcommand("sweep", "Run a lambda x gamma x replicate sweep and summarize it");
  auto* bounds = app.add_subcommand("bounds", "Tabulate admissibility, contraction factors and distance bounds");
  auto* validate = app.add_subcommand("validate", "Run the built-in property checks");
  for (auto* cmd : {run, sweep, bounds}) add_common(cmd, opts);
  sweep->add_option("--threads", opts.threads, "Worker threads (0 = all cores)");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return selfcorr::cmd_run(opts, std::cerr);
  if (sweep->parsed()) return selfcorr::cmd_sweep(opts, std::cerr);
  if (bounds->parsed()) return selfcorr::cmd_bounds(opts, std::cerr);
  if (validate->parsed()) return selfcorr::cmd_validate(std::cout);
  return 1;
}
