#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "nested/problem.hpp"
#include "nested/rng.hpp"
#include "nested/trace.hpp"

namespace nested {

enum class SamplerKind { rejection, ellipsoid, multi_ellipsoid, random_walk, slice };

std::string to_string(SamplerKind kind);

struct SamplerConfig {
  SamplerKind kind = SamplerKind::slice;
  double enlargement = 1.1;   // region volume inflation
  int steps = 0;              // step samplers; 0 means default_step_count(d)
  double target_accept = 0.5; // random-walk tuning target
  double step_scale = 0.1;    // random-walk proposal scale, hypercube units
  int max_clusters = 8;
  std::int64_t call_budget = 10'000'000;  // likelihood calls per replacement
  std::int64_t tune_warmup = 0;  // 0: tune continuously; >0: freeze after N iterations

  std::string description(int dimension) const;
};

struct SamplerStats {
  std::int64_t proposals = 0;
  std::int64_t accepts = 0;
  std::int64_t likelihood_calls = 0;
  std::int64_t stale_walks = 0;     // random walks that accepted no move
  std::int64_t degenerate_fits = 0; // covariance fits that needed jitter

  double accept_rate() const {
    return proposals > 0 ? static_cast<double>(accepts) / proposals : 0.0;
  }
  double efficiency() const {
    return likelihood_calls > 0 ? static_cast<double>(accepts) / likelihood_calls : 0.0;
  }
  SamplerStats& operator+=(const SamplerStats& o);
};

struct SampleResult {
  Particle particle;
  SamplerStats stats;
};

/// Call budget exceeded while searching above a threshold.
class SamplerExhausted : public std::runtime_error {
 public:
  SamplerExhausted(double threshold_log_like, std::int64_t budget);
  double threshold_log_like;
};

/// Slice shrinkage failed to find the contour (> 1e5 shrink steps).
class NumericalContourError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Default step count for step samplers, 5 * dimension.
int default_step_count(int dimension);

/// Multiplies the scale by exp((accept_rate - target) / 10); monotone in
/// the acceptance rate and a fixed point at the target.
double tune_step_scale(const SamplerStats& stats, double target_accept, double current);

/// Exact iid draw from the constrained prior by sampling the whole unit
/// hypercube; the reference every other strategy is tested against.
SampleResult sample_rejection(const Problem& problem, LogValue threshold,
                              RngStream& rng,
                              std::int64_t call_budget = 10'000'000);

/// A strategy prepared against an immutable live-set snapshot. draw() is
/// const and may run concurrently on one snapshot; all mutation of tuning
/// state happens at the coordinator between iterations.
class ConstrainedSampler {
 public:
  virtual ~ConstrainedSampler() = default;
  virtual SampleResult draw(const Problem& problem, LogValue threshold,
                            RngStream& rng) const = 0;
  /// Stats accumulated while fitting (e.g. degenerate covariance flags).
  const SamplerStats& fit_stats() const { return fit_stats_; }

 protected:
  SamplerStats fit_stats_;
};

/// Builds the configured strategy from a live-set snapshot. step_scale
/// overrides config.step_scale (the engine passes its tuned value).
/// Step samplers keep a reference into `live`: the snapshot must stay
/// alive and unmodified for the sampler's lifetime.
std::unique_ptr<ConstrainedSampler> prepare_sampler(const SamplerConfig& config,
                                                    const Problem& problem,
                                                    const std::vector<Particle>& live,
                                                    double step_scale,
                                                    RngStream& fit_rng);

// One-shot forms of the per-strategy operations (fit + single draw).
SampleResult sample_multi_ellipsoid(const std::vector<Particle>& live,
                                    LogValue threshold, const Problem& problem,
                                    const SamplerConfig& config, RngStream& rng);
SampleResult sample_random_walk(const std::vector<Particle>& live, LogValue threshold,
                                const Problem& problem, const SamplerConfig& config,
                                RngStream& rng);
SampleResult sample_slice(const std::vector<Particle>& live, LogValue threshold,
                          const Problem& problem, const SamplerConfig& config,
                          RngStream& rng);

}  // namespace nested
