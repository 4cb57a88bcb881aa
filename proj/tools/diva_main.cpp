#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "diva/cli.hpp"

namespace {

void add_run_flags(CLI::App* cmd, diva::cli::SimulateOptions& opts) {
  cmd->add_option("--config", opts.config_path, "run configuration (JSON)");
  cmd->add_option("--seed", opts.seed, "root seed; overrides sim.seed");
  cmd->add_option("--strategy", opts.strategy, "grpo | grpo_rrb | diva")
      ->check(CLI::IsMember({"grpo", "grpo_rrb", "diva"}));
  cmd->add_option("--epochs", opts.epochs, "overrides sim.epochs");
  cmd->add_option("--threads", opts.threads, "worker threads; results do not depend on it");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diva: difficulty-adaptive variant advantages for GRPO"};
  app.require_subcommand(1);

  diva::cli::SimulateOptions sim_opts;
  auto* simulate = app.add_subcommand("simulate", "run the synthetic training simulator");
  add_run_flags(simulate, sim_opts);
  simulate->add_option("--out", sim_opts.out_dir, "output directory")->required();

  diva::cli::SimulateOptions cfg_opts;
  std::string cfg_out = "-";
  auto* config = app.add_subcommand("config", "print the resolved run configuration");
  add_run_flags(config, cfg_opts);
  config->add_option("--out", cfg_out, "output file ('-' for stdout)");

  std::string image, perturb_out;
  int level = 0;
  std::uint64_t perturb_seed = 0;
  auto* perturb = app.add_subcommand("perturb", "apply a variant level's image recipe to a PGM/PPM file");
  perturb->add_option("image", image, "input PGM/PPM")->required();
  perturb->add_option("--level", level, "variant level 1..9")->required();
  perturb->add_option("--seed", perturb_seed, "perturbation seed");
  perturb->add_option("--out", perturb_out, "output file")->required();

  std::string rewards, adv_config, adv_out = "-";
  auto* advantage = app.add_subcommand("advantage", "compute per-rollout advantages from a reward log");
  advantage->add_option("rewards", rewards, "reward log (JSON lines)")->required();
  advantage->add_option("--config", adv_config, "run configuration (JSON)");
  advantage->add_option("--out", adv_out, "output CSV ('-' for stdout)");

  std::string theory_out = "-";
  double step = 0.01;
  auto* theory = app.add_subcommand("theory", "tabulate binary advantages and the signal curve");
  theory->add_option("--step", step, "grid step in (0, 0.5)");
  theory->add_option("--out", theory_out, "output CSV ('-' for stdout)");

  CLI11_PARSE(app, argc, argv);

  const diva::cli::Logger log(std::cerr, diva::cli::log_level_from_env());
  if (*simulate) return diva::cli::cmd_simulate(sim_opts, log);
  if (*config) return diva::cli::cmd_config(cfg_opts, cfg_out, log);
  if (*perturb) return diva::cli::cmd_perturb(image, level, perturb_seed, perturb_out, log);
  if (*advantage) return diva::cli::cmd_advantage(rewards, adv_config, adv_out, log);
  if (*theory) return diva::cli::cmd_theory(theory_out, step, log);
  return 1;
}
