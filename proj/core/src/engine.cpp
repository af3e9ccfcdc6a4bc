#include "nested/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include "nested/special.hpp"

namespace nested {

namespace {

constexpr std::uint64_t kPhaseInit = 0;
constexpr std::uint64_t kPhaseCandidate = 1;
constexpr std::uint64_t kPhaseFit = 2;
constexpr std::uint64_t kPhaseDynamic = 3;

std::uint64_t stream_id(std::uint64_t phase, std::uint64_t counter) {
  return (phase << 56) | counter;
}

std::string to_string(FinalizeMode mode) {
  return mode == FinalizeMode::remainder_estimate ? "remainder" : "kill_one_by_one";
}

std::string to_string(PlateauMode mode) {
  switch (mode) {
    case PlateauMode::remove_all: return "remove_all";
    case PlateauMode::top_up: return "top_up";
    case PlateauMode::naive_single: return "naive_single";
  }
  return "unknown";
}

std::vector<Particle> snapshot_particles(const std::vector<LivePoint>& live) {
  std::vector<Particle> out;
  out.reserve(live.size());
  for (const auto& lp : live) out.push_back(lp.particle);
  return out;
}

// Region and slice samplers need d+1 points to fit their geometry; a
// too-small snapshot falls back to plain rejection.
std::unique_ptr<ConstrainedSampler> prepare_with_fallback(
    const SamplerConfig& config, const Problem& problem,
    const std::vector<Particle>& live, double step_scale, RngStream& fit_rng) {
  const bool needs_fit = config.kind == SamplerKind::ellipsoid ||
                         config.kind == SamplerKind::multi_ellipsoid ||
                         config.kind == SamplerKind::slice;
  if (needs_fit &&
      live.size() < static_cast<std::size_t>(problem.dimension()) + 1) {
    SamplerConfig fallback = config;
    fallback.kind = SamplerKind::rejection;
    return prepare_sampler(fallback, problem, live, step_scale, fit_rng);
  }
  return prepare_sampler(config, problem, live, step_scale, fit_rng);
}

// One deterministic round of config.workers candidate draws at the given
// threshold. Slot order fixes both the stream ids and the consumption
// order, so the physical thread count never shows in the output.
void draw_round(EngineState& state, const ConstrainedSampler& sampler,
                const Problem& problem, LogValue threshold,
                const RunConfig& config, SamplerStats& round_stats) {
  const int batch = std::max(1, config.workers);
  const std::uint64_t base = state.candidate_counter;
  state.candidate_counter += static_cast<std::uint64_t>(batch);

  std::vector<std::optional<SampleResult>> results(batch);
  std::vector<bool> exhausted(batch, false);

  const auto eval_slot = [&](int slot) {
    RngStream rng(config.seed,
                  stream_id(kPhaseCandidate, base + static_cast<std::uint64_t>(slot)));
    try {
      results[slot] = sampler.draw(problem, threshold, rng);
    } catch (const SamplerExhausted&) {
      exhausted[slot] = true;
    }
  };

  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int n_threads = std::min(batch, std::max(1, hw > 0 ? hw : 1));
  if (batch == 1 || n_threads == 1) {
    for (int slot = 0; slot < batch; ++slot) eval_slot(slot);
  } else {
    std::atomic<int> cursor{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const int slot = cursor.fetch_add(1);
          if (slot >= batch) return;
          eval_slot(slot);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  bool any_success = false;
  for (int slot = 0; slot < batch; ++slot) {
    if (exhausted[slot]) {
      state.stats.likelihood_calls += config.sampler.call_budget;
      round_stats.likelihood_calls += config.sampler.call_budget;
      continue;
    }
    const auto& r = *results[slot];
    state.stats += r.stats;
    round_stats += r.stats;
    state.pool.push_back({r.particle, -1});
    any_success = true;
  }
  if (!any_success && state.pool.empty()) {
    throw SamplerExhausted(threshold.log(), config.sampler.call_budget);
  }
}

Particle next_candidate(EngineState& state, const ConstrainedSampler& sampler,
                        const Problem& problem, LogValue threshold,
                        const RunConfig& config, SamplerStats& round_stats) {
  for (;;) {
    // Thresholds only rise, so a candidate at or below this one is dead weight.
    std::erase_if(state.pool, [&](const EngineState::Candidate& c) {
      return !(c.particle.log_like > threshold);
    });
    if (!state.pool.empty()) {
      Particle p = std::move(state.pool.front().particle);
      state.pool.pop_front();
      return p;
    }
    draw_round(state, sampler, problem, threshold, config, round_stats);
  }
}

// Rank of log_l among the survivors' likelihoods (count strictly below).
std::int64_t insertion_rank(const std::vector<double>& sorted_log_l, double log_l) {
  return static_cast<std::int64_t>(
      std::lower_bound(sorted_log_l.begin(), sorted_log_l.end(), log_l) -
      sorted_log_l.begin());
}

std::vector<double> sorted_live_log_l(const std::vector<LivePoint>& live) {
  std::vector<double> v;
  v.reserve(live.size());
  for (const auto& lp : live) v.push_back(lp.particle.log_like.log());
  std::sort(v.begin(), v.end());
  return v;
}

// Index set of the minimum-likelihood plateau; ties are exact double
// equality (genuine plateaus), secondary key is creation order.
std::vector<std::size_t> min_group(const std::vector<LivePoint>& live) {
  double min_log_l = std::numeric_limits<double>::infinity();
  for (const auto& lp : live) min_log_l = std::min(min_log_l, lp.particle.log_like.log());
  std::vector<std::size_t> group;
  for (std::size_t i = 0; i < live.size(); ++i) {
    if (live[i].particle.log_like.log() == min_log_l) group.push_back(i);
  }
  std::sort(group.begin(), group.end(), [&](std::size_t a, std::size_t b) {
    return live[a].birth_counter < live[b].birth_counter;
  });
  return group;
}

std::int64_t count_above(const std::vector<LivePoint>& live, double log_l) {
  std::int64_t n = 0;
  for (const auto& lp : live) {
    if (lp.particle.log_like.log() > log_l) ++n;
  }
  return n;
}

// Particles of `trace` live on the contour interval just above `contour`
// (birth <= contour < death); the guide set for thread evolution.
std::vector<Particle> active_between(const RunTrace& trace, LogValue contour) {
  std::vector<Particle> out;
  const double c = contour.log();
  for (const auto& d : trace.dead) {
    if (d.particle.birth_log_like.log() <= c && d.particle.log_like.log() > c) {
      out.push_back(d.particle);
    }
  }
  for (const auto& p : trace.final_live) {
    if (p.birth_log_like.log() <= c && p.log_like.log() > c) out.push_back(p);
  }
  return out;
}

// Union of runs: dead points sorted by contour, equal contours merged
// into one plateau group, n_active recomputed from the pooled
// birth/death pairs.
RunTrace weave(const std::vector<const RunTrace*>& traces, std::string fingerprint) {
  RunTrace out;
  out.config_fingerprint = std::move(fingerprint);
  for (const auto* t : traces) {
    out.dead.insert(out.dead.end(), t->dead.begin(), t->dead.end());
    out.final_live.insert(out.final_live.end(), t->final_live.begin(),
                          t->final_live.end());
    out.truncated = out.truncated || t->truncated;
    out.n_like_calls += t->n_like_calls;
  }
  std::stable_sort(out.dead.begin(), out.dead.end(),
                   [](const DeadPoint& a, const DeadPoint& b) {
                     return a.particle.log_like < b.particle.log_like;
                   });
  const ActiveCounter counter(out);
  std::int64_t order = -1;
  double prev_log_l = std::numeric_limits<double>::quiet_NaN();
  for (auto& d : out.dead) {
    const double log_l = d.particle.log_like.log();
    if (log_l != prev_log_l) {
      ++order;
      prev_log_l = log_l;
    }
    d.order = order;
    d.n_active = counter.at(d.particle.log_like);
  }
  return out;
}

}  // namespace

std::string RunConfig::description(const Problem& problem) const {
  std::ostringstream out;
  out << "nlive=" << nlive << ";sampler=" << sampler.description(problem.dimension())
      << ";tol=" << stop_tol << ";finalize=" << to_string(finalize)
      << ";plateau=" << to_string(plateau) << ";seed=" << seed
      << ";workers=" << workers;
  if (dynamic) {
    out << ";dynamic(G=" << dynamic->posterior_fraction << ",budget=" << dynamic->budget
        << ",batch=" << dynamic->batch << ")";
  }
  return out.str();
}

EngineState init_engine(const Problem& problem, const RunConfig& config) {
  if (config.nlive < 2) throw std::invalid_argument("RunConfig: nlive must be >= 2");
  if (config.workers < 1) throw std::invalid_argument("RunConfig: workers must be >= 1");
  if (!(config.stop_tol >= 0.0)) {
    throw std::invalid_argument("RunConfig: stop_tol must be >= 0");
  }
  if (config.nlive <= problem.dimension()) {
    std::cerr << "nested: warning: nlive (" << config.nlive
              << ") should exceed the dimension (" << problem.dimension() << ")\n";
  }

  EngineState state;
  state.step_scale = config.sampler.step_scale;
  state.trace.config_fingerprint =
      problem.fingerprint() + " | " + config.description(problem);

  const int d = problem.dimension();
  state.live.reserve(config.nlive);
  for (int i = 0; i < config.nlive; ++i) {
    RngStream rng(config.seed, stream_id(kPhaseInit, static_cast<std::uint64_t>(i)));
    Particle p;
    p.u.resize(d);
    for (int k = 0; k < d; ++k) p.u[k] = rng.uniform();
    p.theta = problem.prior().transform(p.u);
    p.log_like = problem.log_like(p.theta);
    p.birth_log_like = LogValue::zero();
    ++state.stats.likelihood_calls;
    state.live.push_back({std::move(p), state.birth_counter++, -1});
  }
  return state;
}

void iterate(EngineState& state, const Problem& problem, const RunConfig& config) {
  if (state.live.empty()) throw std::logic_error("iterate: live set is empty");
  SamplerStats round_stats;

  // Scheme B tops up before removal until nlive - 1 points lie strictly
  // above the (possibly dropping) minimum. Skipped when the whole live
  // set sits on one plateau; that case terminates below.
  if (config.plateau == PlateauMode::top_up) {
    auto group0 = min_group(state.live);
    if (group0.size() < state.live.size()) {
      RngStream fit_rng(config.seed,
                        stream_id(kPhaseFit, 2 * static_cast<std::uint64_t>(state.iteration)));
      const auto snapshot = snapshot_particles(state.live);
      const auto sampler = prepare_with_fallback(config.sampler, problem, snapshot,
                                                 state.step_scale, fit_rng);
      state.stats += sampler->fit_stats();
      double min_log_l = state.live[min_group(state.live).front()].particle.log_like.log();
      while (count_above(state.live, min_log_l) <
             static_cast<std::int64_t>(config.nlive) - 1) {
        Particle p = next_candidate(state, *sampler, problem, state.last_contour,
                                    config, round_stats);
        p.birth_log_like = state.last_contour;
        const auto ranks = sorted_live_log_l(state.live);
        const std::int64_t idx = insertion_rank(ranks, p.log_like.log());
        p.insertion_index = idx;
        state.live.push_back({std::move(p), state.birth_counter++, idx});
        min_log_l = state.live[min_group(state.live).front()].particle.log_like.log();
      }
    }
  }

  auto group = min_group(state.live);
  if (config.plateau == PlateauMode::naive_single && group.size() > 1) {
    group.resize(1);  // ignore the plateau; this is the biased control variant
  }
  const std::int64_t n_before = static_cast<std::int64_t>(state.live.size());
  const std::int64_t q = static_cast<std::int64_t>(group.size());
  const LogValue contour = state.live[group.front()].particle.log_like;

  for (const std::size_t idx : group) {
    const auto& lp = state.live[idx];
    state.trace.dead.push_back(
        {lp.particle, state.iteration, n_before, lp.insertion_index});
  }
  {
    std::vector<LivePoint> survivors;
    survivors.reserve(state.live.size() - group.size());
    for (std::size_t i = 0; i < state.live.size(); ++i) {
      if (std::find(group.begin(), group.end(), i) == group.end()) {
        survivors.push_back(std::move(state.live[i]));
      }
    }
    state.live = std::move(survivors);
  }

  // Volume contracts by the mean-log Beta(n+1-q, q) factor; the running
  // rectangle sum feeds only the stopping rule.
  const double log_t = -harmonic_segment(n_before, q);
  const double log_x_new = state.log_x + log_t;
  if (!contour.is_zero()) {
    state.log_z.add(LogValue(contour.log() +
                             log_sub(LogValue(state.log_x), LogValue(log_x_new)).log()));
  }
  state.log_x = log_x_new;
  state.last_contour = contour;

  if (state.live.empty()) {
    // The plateau covered the whole ensemble: nothing is known to lie
    // above it, and the run has consumed the entire prior.
    state.consumed_all = true;
    ++state.iteration;
    return;
  }

  const std::int64_t n_replace =
      config.plateau == PlateauMode::top_up
          ? static_cast<std::int64_t>(config.nlive) -
                static_cast<std::int64_t>(state.live.size())
          : q;
  if (n_replace > 0) {
    RngStream fit_rng(config.seed,
                      stream_id(kPhaseFit, 2 * static_cast<std::uint64_t>(state.iteration) + 1));
    const auto snapshot = snapshot_particles(state.live);
    const auto sampler = prepare_with_fallback(config.sampler, problem, snapshot,
                                               state.step_scale, fit_rng);
    state.stats += sampler->fit_stats();
    const auto survivor_ranks = sorted_live_log_l(state.live);
    for (std::int64_t r = 0; r < n_replace; ++r) {
      Particle p = next_candidate(state, *sampler, problem, contour, config, round_stats);
      p.birth_log_like = contour;
      const std::int64_t idx = insertion_rank(survivor_ranks, p.log_like.log());
      p.insertion_index = idx;
      state.live.push_back({std::move(p), state.birth_counter++, idx});
    }
  }

  if (config.sampler.kind == SamplerKind::random_walk && round_stats.proposals > 0 &&
      (config.sampler.tune_warmup == 0 ||
       state.iteration < config.sampler.tune_warmup)) {
    state.step_scale =
        tune_step_scale(round_stats, config.sampler.target_accept, state.step_scale);
  }

  double best = -std::numeric_limits<double>::infinity();
  for (const auto& lp : state.live) best = std::max(best, lp.particle.log_like.log());
  state.best_log_like_history.push_back(best);

  ++state.iteration;
}

bool should_stop(const EngineState& state, const RunConfig& config) {
  if (state.iteration < 1) return false;

  if (config.stop_tol == 0.0) {
    // Optimization rule: a likelihood plateau across nlive iterations.
    const std::size_t lag = static_cast<std::size_t>(config.nlive);
    const auto& hist = state.best_log_like_history;
    if (hist.size() <= lag) return false;
    return hist.back() - hist[hist.size() - 1 - lag] < 1e-10;
  }

  LogSum live_sum;
  for (const auto& lp : state.live) live_sum.add(lp.particle.log_like);
  const LogValue total = live_sum.total();
  if (total.is_zero()) return true;  // nothing above the contour contributes
  const double log_mean_live =
      total.log() - std::log(static_cast<double>(state.live.size()));
  const double log_remaining = log_mean_live + state.log_x;

  const LogValue z = state.log_z.total();
  if (z.is_zero()) return false;
  return log_remaining - z.log() <= std::log(config.stop_tol);
}

RunTrace finalize(EngineState state, const RunConfig& config) {
  RunTrace trace = std::move(state.trace);
  if (config.finalize == FinalizeMode::kill_one_by_one) {
    std::sort(state.live.begin(), state.live.end(),
              [](const LivePoint& a, const LivePoint& b) {
                if (a.particle.log_like != b.particle.log_like) {
                  return a.particle.log_like < b.particle.log_like;
                }
                return a.birth_counter < b.birth_counter;
              });
    std::size_t i = 0;
    while (i < state.live.size()) {
      std::size_t j = i;
      while (j < state.live.size() &&
             state.live[j].particle.log_like == state.live[i].particle.log_like) {
        ++j;
      }
      const std::int64_t remaining = static_cast<std::int64_t>(state.live.size() - i);
      for (std::size_t k = i; k < j; ++k) {
        trace.dead.push_back({std::move(state.live[k].particle), state.iteration,
                              remaining, state.live[k].insertion_index});
      }
      ++state.iteration;
      i = j;
    }
  } else {
    trace.final_live.reserve(state.live.size());
    for (auto& lp : state.live) trace.final_live.push_back(std::move(lp.particle));
  }
  trace.n_like_calls = state.stats.likelihood_calls;
  return trace;
}

RunTrace run(const Problem& problem, const RunConfig& config) {
  EngineState state = init_engine(problem, config);
  const std::int64_t max_iterations =
      config.max_iterations > 0
          ? config.max_iterations
          : 100ll * config.nlive * problem.dimension();

  bool truncated = false;
  try {
    for (;;) {
      if (state.iteration >= max_iterations) {
        truncated = true;
        break;
      }
      iterate(state, problem, config);
      if (state.consumed_all) break;
      if (should_stop(state, config)) break;
    }
  } catch (const SamplerExhausted&) {
    truncated = true;
  }

  RunTrace trace = finalize(std::move(state), config);
  trace.truncated = truncated;
  return trace;
}

RunTrace merge(const std::vector<RunTrace>& traces) {
  if (traces.empty()) throw std::invalid_argument("merge: no traces");
  if (traces.size() == 1) return traces.front();

  const std::string problem_fp = traces.front().problem_fingerprint();
  std::vector<const RunTrace*> ptrs;
  std::ostringstream configs;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    if (traces[i].problem_fingerprint() != problem_fp) {
      throw std::invalid_argument("merge: incompatible problem fingerprints: '" +
                                  problem_fp + "' vs '" +
                                  traces[i].problem_fingerprint() + "'");
    }
    ptrs.push_back(&traces[i]);
    const auto& fp = traces[i].config_fingerprint;
    const auto cut = fp.find(" | ");
    if (i > 0) configs << "; ";
    configs << (cut == std::string::npos ? fp : fp.substr(cut + 3));
  }
  RunTrace out = weave(ptrs, problem_fp + " | merged[" + configs.str() + "]");
  check_trace(out);
  return out;
}

namespace {

struct ImportanceWindow {
  LogValue start_contour;  // births are injected here
  LogValue end_contour;    // threads evolve until they pass this
};

ImportanceWindow importance_window(const RunTrace& trace, double posterior_fraction) {
  const auto volumes = assign_volumes(trace, VolumeMethod::mean_log);
  const std::size_t n = trace.dead.size();
  if (n == 0) throw std::logic_error("importance_window: no dead points");

  // Posterior-mass density in log X: L_i X_i, peak-normalized.
  std::vector<double> log_mass(n);
  double mass_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    log_mass[i] = trace.dead[i].particle.log_like.log() + volumes.log_x[i];
    mass_max = std::max(mass_max, log_mass[i]);
  }

  // Remaining-evidence fraction: suffix sums of L_i X_i as a proxy for
  // the unexplored contribution, normalized to the first contour.
  std::vector<double> log_suffix(n);
  LogSum tail;
  for (std::size_t i = n; i-- > 0;) {
    tail.add(LogValue(log_mass[i]));
    log_suffix[i] = tail.total().log();
  }

  const double g = std::clamp(posterior_fraction, 0.0, 1.0);
  std::vector<double> importance(n);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    importance[i] = g * std::exp(log_mass[i] - mass_max) +
                    (1.0 - g) * std::exp(log_suffix[i] - log_suffix[0]);
    peak = std::max(peak, importance[i]);
  }

  constexpr double kWindowFraction = 0.1;  // contours within 10% of the peak
  std::size_t first = n;
  std::size_t last = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (importance[i] >= (1.0 - kWindowFraction) * peak) {
      first = std::min(first, i);
      last = std::max(last, i);
    }
  }
  ImportanceWindow window;
  window.start_contour =
      first == 0 ? LogValue::zero() : trace.dead[first - 1].particle.log_like;
  window.end_contour = trace.dead[last].particle.log_like;
  return window;
}

}  // namespace

RunTrace run_dynamic(const Problem& problem, const RunConfig& config) {
  if (!config.dynamic) {
    throw std::invalid_argument("run_dynamic: config.dynamic is not set");
  }
  RunTrace base = run(problem, config);
  const DynamicGoal goal = *config.dynamic;
  if (goal.budget <= 0) return base;
  if (base.dead.empty()) return base;

  const std::string fingerprint = base.config_fingerprint;
  RunTrace merged = std::move(base);
  std::int64_t spent = 0;
  std::uint64_t dyn_counter = 0;
  const int batch = std::max(1, goal.batch);
  bool injected_any = false;

  while (spent < goal.budget) {
    const ImportanceWindow window =
        importance_window(merged, goal.posterior_fraction);

    std::vector<RunTrace> threads;
    for (int t = 0; t < batch && spent < goal.budget; ++t) {
      RunTrace thread;
      thread.config_fingerprint = fingerprint;

      LogValue threshold = window.start_contour;
      Particle current;
      std::int64_t current_rank = -1;
      std::int64_t order = 0;
      bool alive = false;
      while (spent < goal.budget) {
        auto guide = active_between(merged, threshold);
        RngStream fit_rng(config.seed, stream_id(kPhaseFit, (1ull << 40) + dyn_counter));
        RngStream draw_rng(config.seed, stream_id(kPhaseDynamic, dyn_counter));
        ++dyn_counter;
        const auto sampler = prepare_with_fallback(
            config.sampler, problem, guide, config.sampler.step_scale, fit_rng);
        SampleResult result;
        try {
          result = sampler->draw(problem, threshold, draw_rng);
        } catch (const SamplerExhausted&) {
          spent += config.sampler.call_budget;
          thread.truncated = true;
          break;
        }
        spent += result.stats.likelihood_calls;
        thread.n_like_calls += result.stats.likelihood_calls;

        std::vector<double> guide_log_l;
        guide_log_l.reserve(guide.size());
        for (const auto& p : guide) guide_log_l.push_back(p.log_like.log());
        std::sort(guide_log_l.begin(), guide_log_l.end());
        const std::int64_t rank =
            insertion_rank(guide_log_l, result.particle.log_like.log());

        if (alive) {
          // The previous thread point dies at the new draw's threshold.
          thread.dead.push_back({std::move(current), order++, 1, current_rank});
        }
        current = std::move(result.particle);
        current.birth_log_like = threshold;
        current.insertion_index = rank;
        current_rank = rank;
        alive = true;
        if (current.log_like > window.end_contour) break;
        threshold = current.log_like;
      }
      if (alive) {
        thread.final_live.push_back(std::move(current));
        threads.push_back(std::move(thread));
      }
    }
    if (threads.empty()) break;
    injected_any = true;

    std::vector<const RunTrace*> ptrs{&merged};
    for (const auto& t : threads) ptrs.push_back(&t);
    merged = weave(ptrs, fingerprint + ";dynamic(G=" +
                             std::to_string(goal.posterior_fraction) +
                             ",budget=" + std::to_string(goal.budget) + ")");
  }

  if (!injected_any) {
    std::cerr << "nested: warning: dynamic budget too small for one batch; "
                 "returning the exploratory run\n";
  }
  return merged;
}

SpeedupModel parallel_speedup_model(int ncpu, int nlive, double efficiency) {
  if (ncpu < 1 || nlive < 1 || !(efficiency > 0.0)) {
    throw std::domain_error("parallel_speedup_model: arguments must be positive");
  }
  SpeedupModel model;
  model.discard_mode = std::min(static_cast<double>(ncpu), 1.0 / efficiency);
  model.defer_mode =
      nlive * std::log1p(static_cast<double>(ncpu) / static_cast<double>(nlive));
  return model;
}

}  // namespace nested
