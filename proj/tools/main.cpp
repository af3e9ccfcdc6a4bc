#include <CLI11.hpp>

#include "commands.hpp"
#include "nested/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"nested: nested sampling runner and post-processor"};
  app.set_version_flag("--version", std::string(nested::kVersion));
  app.require_subcommand(1);

  nested::cli::RunOptions run_options;
  std::uint64_t seed_override = 0;
  int workers_override = 0;
  std::string output_override;
  auto* run = app.add_subcommand("run", "Run nested sampling from a config file");
  run->add_option("--config", run_options.config_path, "key=value config file")
      ->required();
  auto* seed_opt = run->add_option("--seed", seed_override, "override the config seed");
  auto* workers_opt =
      run->add_option("--workers", workers_override, "override the worker count");
  auto* output_opt =
      run->add_option("--output", output_override, "override the output directory");

  nested::cli::SummaryOptions summary_options;
  auto* summary =
      app.add_subcommand("summary", "Recompute the triplet from a run directory");
  summary->add_option("run_dir", summary_options.run_dir, "run output directory")
      ->required();
  summary->add_option("--simulate", summary_options.simulate,
                      "number of simulated volume assignments");
  summary->add_option("--sim-seed", summary_options.sim_seed,
                      "seed for the simulated assignments");

  nested::cli::PlotDataOptions plot_options;
  auto* plotdata = app.add_subcommand("plotdata", "Emit tabular plot data");
  plotdata->add_option("run_dir", plot_options.run_dir, "run output directory")
      ->required();
  plotdata
      ->add_option("--kind", plot_options.kind,
                   "posterior_1d | logL_vs_logX | thermo")
      ->required();
  plotdata->add_option("--beta-min", plot_options.beta_min, "thermo grid start");
  plotdata->add_option("--beta-max", plot_options.beta_max, "thermo grid end");
  plotdata->add_option("--beta-n", plot_options.beta_n, "thermo grid size");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    if (*seed_opt) run_options.seed = seed_override;
    if (*workers_opt) run_options.workers = workers_override;
    if (*output_opt) run_options.output = output_override;
    return nested::cli::cmd_run(run_options);
  }
  if (summary->parsed()) return nested::cli::cmd_summary(summary_options);
  if (plotdata->parsed()) return nested::cli::cmd_plotdata(plot_options);
  return 1;
}
