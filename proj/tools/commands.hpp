#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace nested::cli {

struct RunOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;   // overrides the config file
  std::optional<int> workers;          // overrides the config file
  std::optional<std::string> output;   // overrides the config file
};

struct SummaryOptions {
  std::string run_dir;
  int simulate = 1000;
  std::uint64_t sim_seed = 71;
};

struct PlotDataOptions {
  std::string run_dir;
  std::string kind;  // posterior_1d | logL_vs_logX | thermo
  double beta_min = 0.5;
  double beta_max = 4.0;
  int beta_n = 9;
};

// Exit codes: 0 pass/warn, 2 diagnostic fail, 1 error.
int cmd_run(const RunOptions& options);
int cmd_summary(const SummaryOptions& options);
int cmd_plotdata(const PlotDataOptions& options);

}  // namespace nested::cli
