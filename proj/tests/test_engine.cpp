#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "nested/diagnostics.hpp"
#include "nested/engine.hpp"
#include "nested/estimators.hpp"
#include "nested/io.hpp"
#include "nested/problem.hpp"

using namespace nested;

namespace {

RunConfig slice_config(int nlive, std::uint64_t seed) {
  RunConfig config;
  config.nlive = nlive;
  config.sampler.kind = SamplerKind::slice;
  config.seed = seed;
  return config;
}

std::string trace_to_csv(const RunTrace& trace) {
  const std::string path = "/tmp/nested_test_trace.csv";
  write_dead_points(path, trace);
  std::ostringstream buffer;
  std::ifstream in(path);
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TEST_CASE("worked example regime: gaussian toy with slice sampling") {
  const Problem problem = truncated_gaussian(5.0, 2);
  RunConfig config = slice_config(1000, 67);
  config.sampler.steps = 5;
  const RunTrace trace = run(problem, config);
  CHECK_FALSE(trace.truncated);
  CHECK_NOTHROW(check_trace(trace));

  const auto volumes = assign_volumes(trace, VolumeMethod::mean_log);
  const double log_z = log_evidence(trace, volumes).log();
  const double h = kl_divergence(trace, volumes);
  CHECK(std::abs(h - 2.46) < 0.3);
  CHECK(std::abs(log_z - (-3.46)) < 3.0 * evidence_error(h, 1000));
}

TEST_CASE("constant likelihood: one plateau iteration consumes everything") {
  const double log_c = std::log(0.25);
  const Problem problem("flat", PriorTransform::uniform(1, 0.0, 1.0),
                        [log_c](std::span<const double>) { return log_c; });
  RunConfig config;
  config.nlive = 50;
  config.sampler.kind = SamplerKind::rejection;
  config.seed = 3;
  const RunTrace trace = run(problem, config);
  CHECK(trace.dead.size() == 50);
  CHECK(trace.final_live.empty());
  CHECK_FALSE(trace.truncated);
  for (const auto& d : trace.dead) CHECK(d.order == 0);

  const auto volumes = assign_volumes(trace, VolumeMethod::mean_log);
  CHECK(log_evidence(trace, volumes).log() == doctest::Approx(log_c).epsilon(1e-12));
  CHECK(kl_divergence(trace, volumes) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("nlive = 2 runs and terminates") {
  const Problem problem = truncated_gaussian(5.0, 1);
  RunConfig config;
  config.nlive = 2;
  config.sampler.kind = SamplerKind::rejection;
  config.seed = 4;
  const RunTrace trace = run(problem, config);
  CHECK(trace.dead.size() > 2);
  CHECK_NOTHROW(check_trace(trace));
}

TEST_CASE("config validation") {
  const Problem problem = truncated_gaussian(5.0, 2);
  RunConfig config;
  config.nlive = 1;
  CHECK_THROWS_AS(run(problem, config), std::invalid_argument);
  config.nlive = 10;
  config.workers = 0;
  CHECK_THROWS_AS(run(problem, config), std::invalid_argument);
  config.workers = 1;
  config.stop_tol = -1.0;
  CHECK_THROWS_AS(run(problem, config), std::invalid_argument);
}

TEST_CASE("running mean-log volume is exactly -k/nlive") {
  const Problem problem = truncated_gaussian(5.0, 2);
  RunConfig config;
  config.nlive = 100;
  config.sampler.kind = SamplerKind::rejection;
  config.seed = 9;
  EngineState state = init_engine(problem, config);
  for (int k = 1; k <= 10; ++k) {
    iterate(state, problem, config);
    CHECK(state.log_x == doctest::Approx(-k / 100.0).epsilon(1e-14));
  }
  CHECK(state.trace.dead.size() == 10);
  CHECK(state.live.size() == 100);
}

TEST_CASE("insertion indexes stay in range and reach the extremes") {
  const Problem problem = truncated_gaussian(5.0, 2);
  RunConfig config;
  config.nlive = 50;
  config.sampler.kind = SamplerKind::rejection;
  config.seed = 10;
  const RunTrace trace = run(problem, config);
  std::int64_t max_seen = -1;
  std::int64_t min_seen = 1000;
  for (const auto& d : trace.dead) {
    if (d.insertion_index < 0) continue;
    CHECK(d.insertion_index < 50);
    max_seen = std::max(max_seen, d.insertion_index);
    min_seen = std::min(min_seen, d.insertion_index);
  }
  CHECK(max_seen == 49);
  CHECK(min_seen == 0);
}

TEST_CASE("stop_tol = infinity stops after the first iteration") {
  const Problem problem = truncated_gaussian(5.0, 2);
  RunConfig config;
  config.nlive = 30;
  config.sampler.kind = SamplerKind::rejection;
  config.stop_tol = std::numeric_limits<double>::infinity();
  config.seed = 12;
  const RunTrace trace = run(problem, config);
  CHECK(trace.dead.size() == 1);
  CHECK(trace.final_live.size() == 30);
}

TEST_CASE("kill-one-by-one finalization decrements n_active to 1") {
  const Problem problem = truncated_gaussian(5.0, 2);
  RunConfig config;
  config.nlive = 3;
  config.sampler.kind = SamplerKind::rejection;
  config.stop_tol = std::numeric_limits<double>::infinity();
  config.finalize = FinalizeMode::kill_one_by_one;
  config.seed = 13;
  const RunTrace trace = run(problem, config);
  REQUIRE(trace.dead.size() == 4);  // 1 iteration + 3 kills
  CHECK(trace.final_live.empty());
  CHECK(trace.dead[1].n_active == 3);
  CHECK(trace.dead[2].n_active == 2);
  CHECK(trace.dead[3].n_active == 1);
  CHECK_NOTHROW(check_trace(trace));
}

TEST_CASE("finalization modes agree within the statistical error") {
  const Problem problem = truncated_gaussian(5.0, 2);
  double diff_sum = 0.0;
  const int n_seeds = 20;
  for (int s = 0; s < n_seeds; ++s) {
    RunConfig config = slice_config(300, 1000 + s);
    config.finalize = FinalizeMode::remainder_estimate;
    const auto remainder = run(problem, config);
    config.finalize = FinalizeMode::kill_one_by_one;
    const auto killed = run(problem, config);
    const double z_r =
        log_evidence(remainder, assign_volumes(remainder, VolumeMethod::mean_log)).log();
    const double z_k =
        log_evidence(killed, assign_volumes(killed, VolumeMethod::mean_log)).log();
    diff_sum += z_r - z_k;
  }
  const double sigma = evidence_error(2.46, 300);
  CHECK(std::abs(diff_sum / n_seeds) < sigma);
}

TEST_CASE("truncation: tiny call budget yields a flagged partial trace") {
  const Problem problem = truncated_gaussian(5.0, 2);
  RunConfig config;
  config.nlive = 100;
  config.sampler.kind = SamplerKind::rejection;
  config.sampler.call_budget = 2000;
  config.seed = 14;
  const RunTrace trace = run(problem, config);
  CHECK(trace.truncated);
  CHECK(!trace.dead.empty());
  // The exhausted iteration had already retired its dead point; the
  // surviving 99 live points are preserved as finals.
  CHECK(trace.final_live.size() == 99);
}

TEST_CASE("plateau problem: scheme A recovers the finite-sum evidence") {
  const std::vector<std::pair<double, double>> levels = {
      {std::log(1.0), 0.9}, {std::log(2.0), 0.09}, {std::log(3.0), 0.01}};
  const Problem problem = plateau_problem(levels);
  RunConfig config;
  config.nlive = 500;
  config.sampler.kind = SamplerKind::rejection;
  config.seed = 15;
  const RunTrace trace = run(problem, config);
  CHECK_FALSE(trace.truncated);
  CHECK_NOTHROW(check_trace(trace));
  // Three plateau groups, atomically removed; the top one consumes the run.
  std::set<std::int64_t> orders;
  for (const auto& d : trace.dead) orders.insert(d.order);
  CHECK(orders.size() == 3);
  CHECK(trace.final_live.empty());

  const auto volumes = assign_volumes(trace, VolumeMethod::mean_log);
  CHECK(std::abs(log_evidence(trace, volumes).log() - std::log(1.11)) < 0.05);
}

TEST_CASE("plateau problem: scheme B tops up and agrees with the oracle") {
  const std::vector<std::pair<double, double>> levels = {
      {std::log(1.0), 0.9}, {std::log(2.0), 0.09}, {std::log(3.0), 0.01}};
  const Problem problem = plateau_problem(levels);
  RunConfig config;
  config.nlive = 500;
  config.sampler.kind = SamplerKind::rejection;
  config.plateau = PlateauMode::top_up;
  config.seed = 16;
  const RunTrace trace = run(problem, config);
  CHECK_NOTHROW(check_trace(trace));
  const auto volumes = assign_volumes(trace, VolumeMethod::mean_log);
  CHECK(std::abs(log_evidence(trace, volumes).log() - std::log(1.11)) < 0.05);
  // The top-up scheme records the enlarged ensemble in n_active.
  std::int64_t max_active = 0;
  for (const auto& d : trace.dead) max_active = std::max(max_active, d.n_active);
  CHECK(max_active > 500);
}

TEST_CASE("naive single-death plateau handling violates the trace invariants") {
  const std::vector<std::pair<double, double>> levels = {
      {std::log(1.0), 0.9}, {std::log(2.0), 0.09}, {std::log(3.0), 0.01}};
  const Problem problem = plateau_problem(levels);
  RunConfig config;
  config.nlive = 100;
  config.sampler.kind = SamplerKind::rejection;
  config.plateau = PlateauMode::naive_single;
  config.sampler.call_budget = 100000;
  config.seed = 17;
  const RunTrace trace = run(problem, config);
  CHECK(trace.truncated);  // exhausts trying to climb above the top plateau
  CHECK_THROWS_AS(check_trace(trace), std::logic_error);
}

TEST_CASE("merge: identity, additivity, fingerprint guard") {
  const Problem problem = truncated_gaussian(5.0, 2);
  RunConfig config_a = slice_config(250, 21);
  config_a.sampler.kind = SamplerKind::rejection;
  RunConfig config_b = slice_config(250, 22);
  config_b.sampler.kind = SamplerKind::rejection;
  const RunTrace a = run(problem, config_a);
  const RunTrace b = run(problem, config_b);

  const RunTrace identity = merge({a});
  CHECK(identity.dead.size() == a.dead.size());
  CHECK(identity.config_fingerprint == a.config_fingerprint);

  const RunTrace merged = merge({a, b});
  CHECK_NOTHROW(check_trace(merged));
  CHECK(merged.dead.size() == a.dead.size() + b.dead.size());
  CHECK(merged.final_live.size() == 500);
  CHECK(merged.n_like_calls == a.n_like_calls + b.n_like_calls);

  // Pooled live points: early contours are covered by all 500.
  const LogValue early = merged.dead[5].particle.log_like;
  CHECK(active_count(merged, early) == 500);
  CHECK(merged.dead[5].n_active == 500);

  const Problem other = cone_volume_problem(2);
  RunConfig config_c;
  config_c.nlive = 50;
  config_c.sampler.kind = SamplerKind::rejection;
  config_c.seed = 23;
  const RunTrace c = run(other, config_c);
  CHECK_THROWS_AS(merge({a, c}), std::invalid_argument);
  CHECK_THROWS_AS(merge({}), std::invalid_argument);
}

TEST_CASE("merged evidence lands near the direct-run evidence") {
  const Problem problem = truncated_gaussian(5.0, 2);
  RunConfig config_a = slice_config(250, 31);
  RunConfig config_b = slice_config(250, 32);
  const RunTrace merged = merge({run(problem, config_a), run(problem, config_b)});
  const auto volumes = assign_volumes(merged, VolumeMethod::mean_log);
  const double log_z = log_evidence(merged, volumes).log();
  CHECK(std::abs(log_z - (-3.46)) < 4.0 * evidence_error(2.46, 500));
}

TEST_CASE("same seed and config reproduce the trace byte for byte") {
  const Problem problem = truncated_gaussian(5.0, 2);
  RunConfig config = slice_config(100, 41);
  config.workers = 4;  // exercise the deterministic candidate batching
  const RunTrace a = run(problem, config);
  const RunTrace b = run(problem, config);
  CHECK(trace_to_csv(a) == trace_to_csv(b));
}

TEST_CASE("worker batching produces valid deferred-candidate traces") {
  const Problem problem = truncated_gaussian(5.0, 2);
  RunConfig config;
  config.nlive = 80;
  config.sampler.kind = SamplerKind::rejection;
  config.seed = 43;
  config.workers = 4;
  const RunTrace trace = run(problem, config);
  CHECK_NOTHROW(check_trace(trace));
  const auto volumes = assign_volumes(trace, VolumeMethod::mean_log);
  CHECK(std::abs(log_evidence(trace, volumes).log() - (-3.46)) <
        4.0 * evidence_error(2.46, 80));
}

TEST_CASE("optimization mode compresses onto the likelihood maximum") {
  const Problem problem = truncated_gaussian(5.0, 2);
  RunConfig config = slice_config(100, 47);
  config.stop_tol = 0.0;  // likelihood-plateau stopping
  const RunTrace trace = run(problem, config);
  const Particle& best = max_likelihood_particle(trace);
  CHECK(best.log_like.log() > -0.01);  // |theta| within 0.1 of the maximum
}

TEST_CASE("dynamic with zero budget is exactly the static run") {
  const Problem problem = truncated_gaussian(5.0, 2);
  RunConfig config = slice_config(100, 51);
  config.dynamic = DynamicGoal{1.0, 0, 8};
  const RunTrace dynamic = run_dynamic(problem, config);
  RunConfig static_config = slice_config(100, 51);
  static_config.dynamic = config.dynamic;
  const RunTrace base = run(problem, static_config);
  CHECK(trace_to_csv(dynamic) == trace_to_csv(base));
}

TEST_CASE("dynamic posterior goal concentrates births in the posterior bulk") {
  const Problem problem = truncated_gaussian(5.0, 2);
  RunConfig config;
  config.nlive = 200;
  config.sampler.kind = SamplerKind::rejection;
  config.seed = 53;
  config.dynamic = DynamicGoal{1.0, 40000, 8};
  const RunTrace trace = run_dynamic(problem, config);
  CHECK_NOTHROW(check_trace(trace));
  CHECK(trace.n_like_calls > 0);

  // Injected threads raise n_active inside the bulk window
  // log X in [-H - 2, -H + 2] and leave the early contours at nlive.
  const auto volumes = assign_volumes(trace, VolumeMethod::mean_log);
  const double h = 2.46;
  std::int64_t max_active_bulk = 0;
  std::int64_t max_active_early = 0;
  for (std::size_t i = 0; i < trace.dead.size(); ++i) {
    const double lx = volumes.log_x[i];
    if (lx > -h - 2.0 && lx < -h + 2.0) {
      max_active_bulk = std::max(max_active_bulk, trace.dead[i].n_active);
    }
    if (lx > -0.5) {
      max_active_early = std::max(max_active_early, trace.dead[i].n_active);
    }
  }
  CHECK(max_active_bulk > 200);
  CHECK(max_active_early == 200);
}

TEST_CASE("dynamic evidence goal spends its budget at early contours") {
  const Problem problem = truncated_gaussian(5.0, 2);
  RunConfig config;
  config.nlive = 200;
  config.sampler.kind = SamplerKind::rejection;
  config.seed = 54;
  config.dynamic = DynamicGoal{0.0, 20000, 8};
  const RunTrace trace = run_dynamic(problem, config);
  CHECK_NOTHROW(check_trace(trace));
  std::int64_t max_active_early = 0;
  for (const auto& d : trace.dead) {
    if (d.order < 50) max_active_early = std::max(max_active_early, d.n_active);
  }
  CHECK(max_active_early > 200);
}

TEST_CASE("run_dynamic requires the goal") {
  const Problem problem = truncated_gaussian(5.0, 2);
  RunConfig config = slice_config(50, 55);
  CHECK_THROWS_AS(run_dynamic(problem, config), std::invalid_argument);
}

TEST_CASE("parallel speed-up model") {
  const auto model = parallel_speedup_model(4, 1000, 0.25);
  CHECK(model.discard_mode == doctest::Approx(4.0));
  CHECK(model.defer_mode == doctest::Approx(4.0).epsilon(0.01));

  CHECK(parallel_speedup_model(10, 1000, 1.0).discard_mode == doctest::Approx(1.0));
  CHECK(parallel_speedup_model(1000, 1000, 0.5).defer_mode ==
        doctest::Approx(1000.0 * std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(parallel_speedup_model(0, 10, 0.5), std::domain_error);
}

TEST_CASE("insertion uniformity under the exact iid sampler") {
  const Problem problem = truncated_gaussian(5.0, 1);
  int healthy = 0;
  const int n_runs = 8;
  for (int s = 0; s < n_runs; ++s) {
    RunConfig config;
    config.nlive = 60;
    config.sampler.kind = SamplerKind::rejection;
    config.seed = 6000 + s;
    const RunTrace trace = run(problem, config);
    if (insertion_test(trace).insertion_p_global > 1e-3) ++healthy;
  }
  CHECK(healthy >= n_runs - 1);
}
