#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "nested/trace.hpp"

using namespace nested;

namespace {

Particle make_particle(double log_l, double birth_log_l) {
  Particle p;
  p.log_like = LogValue(log_l);
  p.birth_log_like = birth_log_l == -std::numeric_limits<double>::infinity()
                         ? LogValue::zero()
                         : LogValue(birth_log_l);
  return p;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// A hand-built static run with nlive = 3: initial points at L = 1, 2, 3,
// replacements born at each death contour, remainder-finalized.
RunTrace tiny_static_trace() {
  RunTrace trace;
  trace.config_fingerprint = "toy | nlive=3";
  trace.dead.push_back({make_particle(1.0, -kInf), 0, 3, -1});
  trace.dead.push_back({make_particle(2.0, -kInf), 1, 3, -1});
  trace.dead.push_back({make_particle(2.5, 1.0), 2, 3, 1});  // born at contour 1
  trace.final_live.push_back(make_particle(3.0, -kInf));
  trace.final_live.push_back(make_particle(2.7, 2.0));
  trace.final_live.push_back(make_particle(2.6, 2.5));
  return trace;
}

}  // namespace

TEST_CASE("active_count counts covering birth/death intervals") {
  const RunTrace trace = tiny_static_trace();
  // Interior contours of a static nlive = 3 run.
  CHECK(active_count(trace, LogValue(0.5)) == 3);
  CHECK(active_count(trace, LogValue(1.5)) == 3);
  CHECK(active_count(trace, LogValue(2.2)) == 3);
  // Above the maximum likelihood nothing is active.
  CHECK(active_count(trace, LogValue(5.0)) == 0);
  // At a death contour the dying point still counts.
  CHECK(active_count(trace, LogValue(2.0)) == 3);
}

TEST_CASE("recorded n_active matches the reconstruction") {
  CHECK_NOTHROW(check_trace(tiny_static_trace()));
}

TEST_CASE("check_trace rejects wrong n_active") {
  RunTrace trace = tiny_static_trace();
  trace.dead[1].n_active = 7;
  CHECK_THROWS_AS(check_trace(trace), std::logic_error);
}

TEST_CASE("check_trace rejects decreasing contours") {
  RunTrace trace = tiny_static_trace();
  std::swap(trace.dead[0], trace.dead[1]);
  trace.dead[0].order = 0;
  trace.dead[1].order = 1;
  CHECK_THROWS_AS(check_trace(trace), std::logic_error);
}

TEST_CASE("check_trace rejects births matching no contour") {
  RunTrace trace = tiny_static_trace();
  trace.dead[2].particle.birth_log_like = LogValue(1.75);
  CHECK_THROWS_AS(check_trace(trace), std::logic_error);
}

TEST_CASE("check_trace rejects the same contour at two iterations") {
  RunTrace trace = tiny_static_trace();
  trace.dead[1].particle.log_like = LogValue(1.0);
  trace.dead[1].particle.birth_log_like = LogValue::zero();
  // Recompute would also fail, but the contour repetition fires first.
  CHECK_THROWS_AS(check_trace(trace), std::logic_error);
}

TEST_CASE("max_likelihood_particle scans dead and final points") {
  const RunTrace trace = tiny_static_trace();
  CHECK(max_likelihood_particle(trace).log_like.log() == 3.0);
  RunTrace empty;
  CHECK_THROWS(max_likelihood_particle(empty));
}

TEST_CASE("problem fingerprint is the part before the separator") {
  const RunTrace trace = tiny_static_trace();
  CHECK(trace.problem_fingerprint() == "toy");
}
