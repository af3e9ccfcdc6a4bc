#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "nested/diagnostics.hpp"
#include "nested/engine.hpp"
#include "nested/estimators.hpp"
#include "nested/io.hpp"
#include "nested/version.hpp"

namespace nested::cli {

namespace {

namespace fs = std::filesystem;

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buffer[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buffer;
}

void write_diagnostics_file(const std::string& path, const DiagnosticReport& report,
                            const DiagnosticReport* volume_report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "insertion_p_global=" << format_double(report.insertion_p_global) << "\n";
  out << "insertion_p_rolling_corrected="
      << format_double(report.insertion_p_rolling_corrected) << "\n";
  out << "insertion_blocks=" << report.insertion_p_rolling.size() << "\n";
  for (std::size_t i = 0; i < report.insertion_p_rolling.size(); ++i) {
    out << "insertion_p_block_" << i << "="
        << format_double(report.insertion_p_rolling[i]) << "\n";
  }
  out << "low_power=" << (report.low_power ? 1 : 0) << "\n";
  out << "verdict=" << to_string(report.verdict) << "\n";
  out << "fail_below=" << format_double(report.fail_below) << "\n";
  out << "warn_below=" << format_double(report.warn_below) << "\n";
  if (volume_report != nullptr) {
    out << "volume_points=" << volume_report->volume_deviations.size() << "\n";
    out << "volume_violation_fraction="
        << format_double(volume_report->volume_violation_fraction) << "\n";
    out << "volume_verdict=" << to_string(volume_report->verdict) << "\n";
  }
}

EvidenceReport recompute_report(const RunTrace& trace, int nsim, std::uint64_t sim_seed) {
  const auto volumes = assign_volumes(trace, VolumeMethod::mean_log);
  return summarize(trace, volumes, nsim, sim_seed);
}

}  // namespace

int cmd_run(const RunOptions& options) {
  try {
    RunSetup setup = parse_config_file(options.config_path);
    if (options.seed) setup.config.seed = *options.seed;
    if (options.workers) setup.config.workers = *options.workers;
    if (options.output) setup.output_dir = *options.output;

    const Problem problem = make_problem(setup);

    RunManifest manifest;
    manifest.setup = setup;
    manifest.version = std::string(kVersion);
    manifest.started_at = timestamp_utc();

    const RunTrace trace = setup.config.dynamic
                               ? run_dynamic(problem, setup.config)
                               : run(problem, setup.config);
    manifest.finished_at = timestamp_utc();
    manifest.fingerprint = trace.config_fingerprint;
    manifest.n_like_calls = trace.n_like_calls;
    manifest.truncated = trace.truncated;

    fs::create_directories(setup.output_dir);
    const fs::path dir(setup.output_dir);
    write_dead_points((dir / "dead_points.csv").string(), trace);
    write_manifest((dir / "manifest.txt").string(), manifest);

    const EvidenceReport report = recompute_report(trace, 1000, 71);
    const DiagnosticReport insertion = insertion_test(trace);
    write_summary((dir / "summary.txt").string(), report,
                  insertion.insertion_p_global, setup.config.seed);

    const DiagnosticReport* volume_ptr = nullptr;
    DiagnosticReport volume_report;
    if (problem.oracle().log_x_of_loglike) {
      const auto volumes = assign_volumes(trace, VolumeMethod::mean_log);
      volume_report = volume_check(trace, volumes, problem);
      volume_ptr = &volume_report;
    }
    write_diagnostics_file((dir / "diagnostics.txt").string(), insertion, volume_ptr);

    std::cout << "log_z=" << format_double(report.log_z)
              << " sigma_log_z=" << format_double(report.sigma_log_z)
              << " h_nats=" << format_double(report.h_nats)
              << " ess=" << format_double(report.ess)
              << " n_like_calls=" << report.n_like_calls
              << " insertion_p=" << format_double(insertion.insertion_p_global)
              << (trace.truncated ? " truncated=1" : "") << "\n";

    const bool fail = insertion.verdict == Verdict::fail ||
                      (volume_ptr != nullptr && volume_ptr->verdict == Verdict::fail);
    return fail ? 2 : 0;
  } catch (const std::exception& e) {
    std::cerr << "nested run: error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_summary(const SummaryOptions& options) {
  try {
    const fs::path dir(options.run_dir);
    const RunTrace trace = read_dead_points((dir / "dead_points.csv").string());
    if (trace.dead.empty()) {
      throw std::runtime_error("empty trace: no dead points recorded");
    }
    RunTrace full = trace;
    const auto manifest_path = dir / "manifest.txt";
    std::uint64_t seed = 0;
    if (fs::exists(manifest_path)) {
      const RunManifest manifest = read_manifest(manifest_path.string());
      full.config_fingerprint = manifest.fingerprint;
      full.n_like_calls = manifest.n_like_calls;
      seed = manifest.setup.config.seed;
    }

    const EvidenceReport report =
        recompute_report(full, options.simulate, options.sim_seed);
    const DiagnosticReport insertion = insertion_test(full);

    std::cout << "log_z=" << format_double(report.log_z) << "\n"
              << "sigma_log_z=" << format_double(report.sigma_log_z) << "\n"
              << "h_nats=" << format_double(report.h_nats) << "\n"
              << "ess=" << format_double(report.ess) << "\n"
              << "n_like_calls=" << report.n_like_calls << "\n"
              << "insertion_p=" << format_double(insertion.insertion_p_global) << "\n"
              << "seed=" << seed << "\n"
              << "version=" << kVersion << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "nested summary: error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_plotdata(const PlotDataOptions& options) {
  try {
    const fs::path dir(options.run_dir);
    const RunTrace trace = read_dead_points((dir / "dead_points.csv").string());
    const auto volumes = assign_volumes(trace, VolumeMethod::mean_log);

    if (options.kind == "posterior_1d") {
      const auto weights = posterior_weights(trace, volumes);
      const std::size_t dim = trace.dead.empty() ? trace.final_live.front().theta.size()
                                                 : trace.dead.front().particle.theta.size();
      const auto theta_of = [&](std::size_t i) -> const std::vector<double>& {
        return i < trace.dead.size() ? trace.dead[i].particle.theta
                                     : trace.final_live[i - trace.dead.size()].theta;
      };
      constexpr int kBins = 64;
      for (std::size_t k = 0; k < dim; ++k) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = 0; i < weights.size(); ++i) {
          lo = std::min(lo, theta_of(i)[k]);
          hi = std::max(hi, theta_of(i)[k]);
        }
        if (!(hi > lo)) hi = lo + 1.0;
        const double width = (hi - lo) / kBins;
        std::vector<double> density(kBins, 0.0);
        for (std::size_t i = 0; i < weights.size(); ++i) {
          int bin = static_cast<int>((theta_of(i)[k] - lo) / width);
          bin = std::clamp(bin, 0, kBins - 1);
          density[bin] += weights[i] / width;
        }
        const std::string path =
            (dir / ("plot_posterior_theta" + std::to_string(k) + ".csv")).string();
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write '" + path + "'");
        out << "bin_center,density\n";
        for (int b = 0; b < kBins; ++b) {
          out << format_double(lo + (b + 0.5) * width) << ","
              << format_double(density[b]) << "\n";
        }
      }
      return 0;
    }

    if (options.kind == "logL_vs_logX") {
      const auto weights = posterior_weights(trace, volumes);
      const std::string path = (dir / "plot_logx_logl.csv").string();
      std::ofstream out(path);
      if (!out) throw std::runtime_error("cannot write '" + path + "'");
      out << "log_x,log_like,posterior_weight\n";
      for (std::size_t i = 0; i < trace.dead.size(); ++i) {
        out << format_double(volumes.log_x[i]) << ","
            << format_double(trace.dead[i].particle.log_like.log()) << ","
            << format_double(weights[i]) << "\n";
      }
      return 0;
    }

    if (options.kind == "thermo") {
      if (options.beta_n < 3 || !(options.beta_min > 0.0) ||
          !(options.beta_max > options.beta_min)) {
        throw std::runtime_error("thermo needs beta_min > 0 < beta_max and >= 3 points");
      }
      std::vector<double> grid(options.beta_n);
      const double step = std::log(options.beta_max / options.beta_min) /
                          (options.beta_n - 1);
      for (int i = 0; i < options.beta_n; ++i) {
        grid[i] = options.beta_min * std::exp(i * step);
      }
      const auto table = mean_energy_and_heat_capacity(trace, volumes, grid);
      const std::string path = (dir / "plot_thermo.csv").string();
      std::ofstream out(path);
      if (!out) throw std::runtime_error("cannot write '" + path + "'");
      out << "beta,log_z_beta,mean_energy,c_v\n";
      for (const auto& row : table) {
        out << format_double(row.beta) << "," << format_double(row.log_z_beta) << ","
            << format_double(row.mean_energy) << ","
            << format_double(row.heat_capacity) << "\n";
      }
      return 0;
    }

    std::cerr << "nested plotdata: unknown kind '" << options.kind
              << "' (expected posterior_1d, logL_vs_logX or thermo)\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "nested plotdata: error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace nested::cli
