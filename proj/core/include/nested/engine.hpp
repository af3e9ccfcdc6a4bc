#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "nested/estimators.hpp"
#include "nested/problem.hpp"
#include "nested/sampler.hpp"
#include "nested/trace.hpp"

namespace nested {

enum class FinalizeMode { remainder_estimate, kill_one_by_one };

/// How plateaus (several live points sharing the minimum likelihood) are
/// retired. remove_all is the Beta(n+1-q, q) scheme and the default;
/// top_up first raises the live count so compression follows Beta(n, q);
/// naive_single ignores the plateau and removes one point per iteration
/// with the ordinary Beta(n, 1) law - it exists to demonstrate the bias
/// the other two schemes remove, and its traces violate the
/// strictly-increasing-contour invariant by construction.
enum class PlateauMode { remove_all, top_up, naive_single };

/// Importance target for dynamic runs: G weighs reducing posterior
/// uncertainty; 1 - G weighs the evidence. budget is the extra
/// likelihood-call allowance; batch is the number of fresh threads
/// injected per refinement round.
struct DynamicGoal {
  double posterior_fraction = 1.0;  // G in [0, 1]
  std::int64_t budget = 0;
  int batch = 8;
};

struct RunConfig {
  int nlive = 500;
  SamplerConfig sampler;
  double stop_tol = 1e-3;
  FinalizeMode finalize = FinalizeMode::remainder_estimate;
  PlateauMode plateau = PlateauMode::remove_all;
  std::int64_t max_iterations = 0;  // 0 means 100 * nlive * dimension
  std::uint64_t seed = 0;
  int workers = 1;  // logical candidate-batch size; part of the run identity
  std::optional<DynamicGoal> dynamic;

  std::string description(const Problem& problem) const;
};

/// A live point with its engine bookkeeping: creation order (the
/// deterministic tie-break key for equal likelihoods) and the insertion
/// index recorded at birth.
struct LivePoint {
  Particle particle;
  std::uint64_t birth_counter = 0;
  std::int64_t insertion_index = -1;
};

/// Loop state of one run. Owned by a single coordinator; candidate draws
/// against the current snapshot may proceed on worker threads, but all
/// mutation happens here between iterations.
struct EngineState {
  std::vector<LivePoint> live;
  RunTrace trace;
  double log_x = 0.0;      // running mean-log volume
  LogSum log_z;            // running evidence accumulator (stopping rule)
  SamplerStats stats;
  std::int64_t iteration = 0;
  std::uint64_t birth_counter = 0;
  double step_scale = 0.1;
  LogValue last_contour = LogValue::zero();
  bool consumed_all = false;  // a plateau covered the whole live set
  std::vector<double> best_log_like_history;  // optimization-mode stop

  // Deferred candidates (drawn against an earlier threshold, still valid
  // later) and the deterministic slot counter that orders them.
  struct Candidate {
    Particle particle;
    std::int64_t insertion_index = -1;
  };
  std::deque<Candidate> pool;
  std::uint64_t candidate_counter = 0;
};

/// Full static run: initialize, iterate until the stopping rule fires (or
/// the iteration cap / sampler exhaustion truncates the run), finalize.
RunTrace run(const Problem& problem, const RunConfig& config);

/// Initializes live points from the prior (streams seeded per point).
EngineState init_engine(const Problem& problem, const RunConfig& config);

/// One removal-and-replacement round: retires the minimum-likelihood
/// plateau group per config.plateau, decrements the running volume by
/// the mean-log Beta factor, and draws the replacements subject to
/// L > threshold, recording each insertion index against the survivors.
void iterate(EngineState& state, const Problem& problem, const RunConfig& config);

/// Remaining-evidence rule: true once mean(live L) * X / Z <= stop_tol.
/// stop_tol = 0 switches to the optimization rule (stop when the best
/// live likelihood improved by less than 1e-10 over nlive iterations).
bool should_stop(const EngineState& state, const RunConfig& config);

/// Applies config.finalize and returns the finished trace.
RunTrace finalize(EngineState state, const RunConfig& config);

/// Weaves statistically independent runs over the same problem into one
/// run with the pooled live count; n_active is recomputed at every
/// contour from the union of birth/death pairs. A single input is
/// returned unchanged.
RunTrace merge(const std::vector<RunTrace>& traces);

/// Dynamic run: a static exploratory pass, then repeated injection of
/// fresh single-live-point threads at the contour window where the
/// importance (G-weighted posterior mass + (1-G)-weighted remaining
/// evidence) exceeds 90% of its peak, until the extra budget is spent.
RunTrace run_dynamic(const Problem& problem, const RunConfig& config);

struct SpeedupModel {
  double discard_mode;  // min(ncpu, 1/efficiency)
  double defer_mode;    // nlive log(1 + ncpu/nlive)
};

/// The paper's two parallel speed-up predictions; the CLI uses these to
/// advise worker counts.
SpeedupModel parallel_speedup_model(int ncpu, int nlive, double efficiency);

}  // namespace nested
