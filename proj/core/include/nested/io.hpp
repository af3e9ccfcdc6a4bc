#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nested/engine.hpp"
#include "nested/estimators.hpp"
#include "nested/problem.hpp"
#include "nested/trace.hpp"

namespace nested {

/// Shortest decimal that round-trips the double exactly (%.17g);
/// infinities print as "inf"/"-inf".
std::string format_double(double v);
double parse_double(const std::string& text);

/// A parsed run configuration: the problem selector plus the engine
/// RunConfig and the output directory.
///
/// Config files are flat key=value text, '#' starts a comment. Keys:
///   problem      gaussian | cone | plateau | harmonic | eggbox |
///                rosenbrock | shells
///   a            problem scale (gaussian/harmonic), default 5
///   d            problem dimension, default 2
///   levels       plateau levels as loglike:fraction[,...]
///   sampler      rejection | ellipsoid | multi_ellipsoid | random_walk | slice
///   nlive, tol, seed, workers, output_dir
///   steps, step_scale, target_accept, enlargement, max_clusters,
///   call_budget, tune_warmup
///   finalize     remainder | kill
///   plateau      remove_all | top_up | naive_single
///   max_iterations
///   dynamic_goal, dynamic_budget, dynamic_batch
/// Unknown keys are an error (no silent defaults for typos).
struct RunSetup {
  std::string problem_name = "gaussian";
  double problem_a = 5.0;
  int problem_d = 2;
  std::vector<std::pair<double, double>> plateau_levels;
  RunConfig config;
  std::string output_dir = "run_output";
};

RunSetup parse_config_file(const std::string& path);
Problem make_problem(const RunSetup& setup);

/// Everything needed to bit-reproduce a run on the same build, plus the
/// call count and timestamps.
struct RunManifest {
  RunSetup setup;
  std::string version;
  std::string fingerprint;
  std::int64_t n_like_calls = 0;
  bool truncated = false;
  std::string started_at;
  std::string finished_at;
};

void write_manifest(const std::string& path, const RunManifest& manifest);
RunManifest read_manifest(const std::string& path);

/// Dead-points file: UTF-8 CSV with header
///   order,log_like,birth_log_like,n_active,insertion_index,theta_0,...
/// one row per dead point in trace order, then one row per final live
/// point with order = -1 (sentinel: never died), n_active = 0 and
/// insertion_index = -1. Floats carry 17 significant digits so the file
/// round-trips bit-exactly.
void write_dead_points(const std::string& path, const RunTrace& trace);

/// Parse errors carry the 1-based line number. The returned trace has no
/// hypercube coordinates (only theta is stored).
RunTrace read_dead_points(const std::string& path);

/// Summary file: flat key=value with exactly the keys
/// log_z, sigma_log_z, h_nats, ess, n_like_calls, insertion_p, seed, version.
void write_summary(const std::string& path, const EvidenceReport& report,
                   double insertion_p, std::uint64_t seed);
std::map<std::string, std::string> read_key_value_file(const std::string& path);

}  // namespace nested
