#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nested/logspace.hpp"

namespace nested {

/// A parameter-space point. u holds the unit-hypercube coordinates, theta
/// the transformed (physical) parameters. birth_log_like is the threshold
/// in force when the point was created; log 0 for initial prior draws.
/// insertion_index keeps the birth rank alive for points that never die
/// (the insertion test needs every born particle, or survivors' high
/// ranks would be missing from the sample).
struct Particle {
  std::vector<double> u;
  std::vector<double> theta;
  LogValue log_like;
  LogValue birth_log_like;
  std::int64_t insertion_index = -1;
};

/// One removal record. Plateau groups removed atomically share an order;
/// n_active is the number of stored particles (dead or final) whose
/// (birth, death] likelihood interval covers this contour, and is
/// recomputable from birth/death pairs alone. insertion_index is the rank
/// of this particle's likelihood among the surviving live points when it
/// was inserted (-1 for initial prior draws).
struct DeadPoint {
  Particle particle;
  std::int64_t order = 0;
  std::int64_t n_active = 0;
  std::int64_t insertion_index = -1;
};

/// The ordered dead-point record from which every estimator is computed
/// post hoc. Birth/death contours are the canonical representation; the
/// per-iteration live count is derived.
struct RunTrace {
  std::vector<DeadPoint> dead;        // sorted by order, non-decreasing log_like
  std::vector<Particle> final_live;   // empty after kill-one-by-one finalization
  std::string config_fingerprint;
  bool truncated = false;             // sampler exhausted or iteration cap hit
  std::int64_t n_like_calls = 0;

  /// Problem half of the fingerprint (the part that must match for merges).
  std::string problem_fingerprint() const;
};

/// Number of stored particles whose birth contour lies strictly below
/// `contour` and whose death contour (likelihood for final points:
/// never reached) is at or above it.
std::int64_t active_count(const RunTrace& trace, LogValue contour);

/// Precomputed birth/death arrays for repeated active_count queries.
class ActiveCounter {
 public:
  explicit ActiveCounter(const RunTrace& trace);
  std::int64_t at(LogValue contour) const;

 private:
  std::vector<double> births_;
  std::vector<double> deaths_;
};

/// Checks every structural trace invariant; throws std::logic_error with
/// a description on the first violation. Verified invariants: dead points
/// sorted by order have non-decreasing likelihood and orders are
/// non-decreasing; equal-order groups share one death contour and one
/// n_active; recorded n_active matches the birth/death reconstruction;
/// every birth contour is log 0 or an earlier death contour; n_active >= 1.
void check_trace(const RunTrace& trace);

/// The highest-likelihood particle seen anywhere in the run (dead or
/// final); the run's answer in optimization mode.
const Particle& max_likelihood_particle(const RunTrace& trace);

}  // namespace nested
