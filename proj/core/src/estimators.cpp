#include "nested/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "nested/rng.hpp"
#include "nested/special.hpp"

namespace nested {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogHalf = std::log(0.5);

void check_consistent(const RunTrace& trace, const VolumeAssignment& volumes) {
  if (volumes.log_x.size() != trace.dead.size()) {
    throw std::invalid_argument("volumes inconsistent with trace (length mismatch)");
  }
}

// Per-point log block weights: dead blocks tile [1, X_end] with edges at
// midpoints of consecutive volumes; the first block opens at X0 = 1 and
// the last closes at X_end (log 0 when nothing survived). Final points
// share X_end equally. Total weight is exactly X0 = 1.
struct BlockWeights {
  std::vector<double> log_w_dead;
  double log_w_final_each = kNegInf;
  std::size_t n_final = 0;
};

BlockWeights block_weights(const RunTrace& trace, const VolumeAssignment& volumes) {
  check_consistent(trace, volumes);
  BlockWeights out;
  const auto& lx = volumes.log_x;
  const std::size_t n = lx.size();
  out.log_w_dead.resize(n);
  out.n_final = trace.final_live.size();

  const auto midpoint = [](double a, double b) {
    return log_add(LogValue(a), LogValue(b)).log() + kLogHalf;
  };

  double upper = 0.0;  // log X0 = log 1
  for (std::size_t i = 0; i < n; ++i) {
    double lower;
    if (i + 1 < n) {
      lower = midpoint(lx[i], lx[i + 1]);
    } else {
      lower = volumes.log_x_end;  // close against the finalization block
    }
    out.log_w_dead[i] = log_sub(LogValue(upper), LogValue(lower)).log();
    upper = lower;
  }

  if (out.n_final > 0) {
    out.log_w_final_each =
        volumes.log_x_end - std::log(static_cast<double>(out.n_final));
  }
  return out;
}

// beta * logL with the conventions L^0 = 1 and 0^beta = 0 (beta > 0).
double scale_log_like(double beta, double log_l) {
  if (beta == 0.0) return 0.0;
  return beta * log_l;
}

struct Terms {
  std::vector<double> log_terms;  // log(w_i L_i^beta), dead then final
  double log_total;
};

Terms weighted_terms(const RunTrace& trace, const VolumeAssignment& volumes,
                     double beta) {
  const BlockWeights w = block_weights(trace, volumes);
  Terms out;
  out.log_terms.reserve(trace.dead.size() + trace.final_live.size());
  LogSum total;
  for (std::size_t i = 0; i < trace.dead.size(); ++i) {
    const double t =
        w.log_w_dead[i] + scale_log_like(beta, trace.dead[i].particle.log_like.log());
    out.log_terms.push_back(t);
    total.add(LogValue(t));
  }
  for (const auto& p : trace.final_live) {
    const double t = w.log_w_final_each + scale_log_like(beta, p.log_like.log());
    out.log_terms.push_back(t);
    total.add(LogValue(t));
  }
  out.log_total = total.total().log();
  return out;
}

const Particle& particle_at(const RunTrace& trace, std::size_t i) {
  if (i < trace.dead.size()) return trace.dead[i].particle;
  return trace.final_live[i - trace.dead.size()];
}

}  // namespace

LogValue thermo_evidence(const RunTrace& trace, const VolumeAssignment& volumes,
                         double beta) {
  if (beta < 0.0) throw std::domain_error("thermo_evidence: beta must be >= 0");
  return LogValue(weighted_terms(trace, volumes, beta).log_total);
}

LogValue log_evidence(const RunTrace& trace, const VolumeAssignment& volumes) {
  return thermo_evidence(trace, volumes, 1.0);
}

std::vector<double> posterior_weights(const RunTrace& trace,
                                      const VolumeAssignment& volumes) {
  const Terms t = weighted_terms(trace, volumes, 1.0);
  if (t.log_total == kNegInf) {
    throw std::domain_error("posterior_weights: all likelihoods are zero");
  }
  std::vector<double> p(t.log_terms.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(t.log_terms[i] - t.log_total);
  }
  return p;
}

double kl_divergence(const RunTrace& trace, const VolumeAssignment& volumes) {
  const Terms t = weighted_terms(trace, volumes, 1.0);
  if (t.log_total == kNegInf) {
    throw std::domain_error("kl_divergence: all likelihoods are zero");
  }
  double h = 0.0;
  for (std::size_t i = 0; i < t.log_terms.size(); ++i) {
    const double p = std::exp(t.log_terms[i] - t.log_total);
    if (p > 0.0) {
      h += p * (particle_at(trace, i).log_like.log() - t.log_total);
    }
  }
  return h;
}

double evidence_error(double h_nats, std::int64_t nlive) {
  if (h_nats < 0.0) throw std::domain_error("evidence_error: H must be >= 0");
  if (nlive < 1) throw std::domain_error("evidence_error: nlive must be >= 1");
  return std::sqrt(h_nats / static_cast<double>(nlive));
}

std::vector<double> simulate_evidence(const RunTrace& trace, int nsamples,
                                      std::uint64_t seed) {
  if (nsamples < 2) throw std::invalid_argument("simulate_evidence: nsamples >= 2");
  std::vector<double> draws(nsamples);
  for (int s = 0; s < nsamples; ++s) {
    const std::uint64_t sim_seed = RngStream(seed, static_cast<std::uint64_t>(s)).next_u64();
    const auto volumes = assign_volumes(trace, VolumeMethod::simulated, sim_seed);
    draws[s] = log_evidence(trace, volumes).log();
  }
  return draws;
}

double effective_sample_size(std::span<const double> weights) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const double w : weights) {
    if (w < 0.0) throw std::domain_error("effective_sample_size: negative weight");
    sum += w;
    sum_sq += w * w;
  }
  if (sum_sq == 0.0) throw std::domain_error("effective_sample_size: all weights zero");
  return sum * sum / sum_sq;
}

double posterior_expectation(const RunTrace& trace, const VolumeAssignment& volumes,
                             const std::function<double(std::span<const double>)>& f) {
  if (!f) throw std::invalid_argument("posterior_expectation: null function");
  const auto p = posterior_weights(trace, volumes);
  double mean = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) mean += p[i] * f(particle_at(trace, i).theta);
  }
  return mean;
}

double bootstrap_posterior_error(const RunTrace& trace,
                                 const std::function<double(std::span<const double>)>& f,
                                 int nresamples, std::uint64_t seed) {
  if (nresamples < 10) {
    throw std::invalid_argument("bootstrap_posterior_error: nresamples >= 10");
  }
  const std::size_t n_dead = trace.dead.size();
  const std::size_t n_items = n_dead + trace.final_live.size();

  // Threads are defined for a constant-nlive run that was finalized with
  // the remainder estimate (each death has exactly one successor).
  std::int64_t nlive = 0;
  for (std::size_t i = 0; i < n_items; ++i) {
    if (particle_at(trace, i).birth_log_like.is_zero()) ++nlive;
  }
  if (nlive < 1) throw std::invalid_argument("bootstrap: no prior-born particles");
  for (const auto& d : trace.dead) {
    if (d.n_active != nlive) {
      throw std::invalid_argument(
          "bootstrap: thread decomposition needs a constant-nlive (static) trace");
    }
  }

  // Successor lookup: particles born at a death contour, in stored order.
  std::map<double, std::vector<std::size_t>> born_at;
  for (std::size_t i = 0; i < n_items; ++i) {
    const auto& p = particle_at(trace, i);
    if (!p.birth_log_like.is_zero()) born_at[p.birth_log_like.log()].push_back(i);
  }
  std::map<double, std::size_t> next_in_bucket;

  std::vector<std::vector<std::size_t>> threads;
  for (std::size_t i = 0; i < n_items; ++i) {
    if (!particle_at(trace, i).birth_log_like.is_zero()) continue;
    std::vector<std::size_t> thread;
    std::size_t cur = i;
    for (;;) {
      thread.push_back(cur);
      if (cur >= n_dead) break;  // ends on a final live point
      const double contour = trace.dead[cur].particle.log_like.log();
      const auto it = born_at.find(contour);
      if (it == born_at.end()) break;
      auto& cursor = next_in_bucket[contour];
      if (cursor >= it->second.size()) break;
      cur = it->second[cursor++];
    }
    threads.push_back(std::move(thread));
  }
  if (static_cast<std::int64_t>(threads.size()) != nlive) {
    throw std::logic_error("bootstrap: thread count does not match nlive");
  }

  std::vector<double> estimates(nresamples);
  for (int r = 0; r < nresamples; ++r) {
    RngStream rng(seed, static_cast<std::uint64_t>(r));
    RunTrace resampled;
    for (std::int64_t t = 0; t < nlive; ++t) {
      const auto& thread = threads[rng.uniform_index(threads.size())];
      for (const std::size_t idx : thread) {
        if (idx < n_dead) {
          resampled.dead.push_back(trace.dead[idx]);
        } else {
          resampled.final_live.push_back(particle_at(trace, idx));
        }
      }
    }
    std::stable_sort(resampled.dead.begin(), resampled.dead.end(),
                     [](const DeadPoint& a, const DeadPoint& b) {
                       return a.particle.log_like < b.particle.log_like;
                     });
    const ActiveCounter counter(resampled);
    for (std::size_t i = 0; i < resampled.dead.size(); ++i) {
      resampled.dead[i].order = static_cast<std::int64_t>(i);
      resampled.dead[i].n_active = counter.at(resampled.dead[i].particle.log_like);
    }
    const auto volumes = assign_volumes(resampled, VolumeMethod::mean_log);
    estimates[r] = posterior_expectation(resampled, volumes, f);
  }

  const double mean = std::accumulate(estimates.begin(), estimates.end(), 0.0) /
                      estimates.size();
  double var = 0.0;
  for (const double e : estimates) var += (e - mean) * (e - mean);
  return std::sqrt(var / (estimates.size() - 1));
}

std::vector<ThermoPoint> mean_energy_and_heat_capacity(
    const RunTrace& trace, const VolumeAssignment& volumes,
    std::span<const double> beta_grid) {
  if (beta_grid.size() < 3) {
    throw std::invalid_argument("mean_energy_and_heat_capacity: need >= 3 grid points");
  }
  for (std::size_t i = 0; i < beta_grid.size(); ++i) {
    if (!(beta_grid[i] > 0.0)) {
      throw std::domain_error("mean_energy_and_heat_capacity: beta must be positive");
    }
    if (i > 0 && !(beta_grid[i] > beta_grid[i - 1])) {
      throw std::invalid_argument("mean_energy_and_heat_capacity: grid must increase");
    }
  }

  std::vector<ThermoPoint> out(beta_grid.size());
  for (std::size_t j = 0; j < beta_grid.size(); ++j) {
    const double beta = beta_grid[j];
    const Terms t = weighted_terms(trace, volumes, beta);
    double mean_e = 0.0;
    for (std::size_t i = 0; i < t.log_terms.size(); ++i) {
      const double p = std::exp(t.log_terms[i] - t.log_total);
      if (p > 0.0) mean_e += p * (-particle_at(trace, i).log_like.log());
    }
    out[j] = {beta, t.log_total, mean_e, 0.0};
  }

  // C_V = d<E>/dT on the temperature grid T = 1/beta (note T decreases
  // along the beta grid).
  const auto temp = [&](std::size_t j) { return 1.0 / out[j].beta; };
  for (std::size_t j = 0; j < out.size(); ++j) {
    const std::size_t lo = (j == 0) ? 0 : j - 1;
    const std::size_t hi = (j + 1 == out.size()) ? j : j + 1;
    out[j].heat_capacity =
        (out[hi].mean_energy - out[lo].mean_energy) / (temp(hi) - temp(lo));
  }
  return out;
}

ReweightResult reweight(
    const RunTrace& trace, const VolumeAssignment& volumes,
    const std::function<double(std::span<const double>)>& new_log_like,
    const std::function<double(std::span<const double>)>& log_prior_ratio) {
  const auto p = posterior_weights(trace, volumes);
  const double log_z = log_evidence(trace, volumes).log();

  std::vector<double> shift(p.size(), 0.0);
  double shift_max = kNegInf;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& particle = particle_at(trace, i);
    double delta = 0.0;
    if (new_log_like) {
      delta += new_log_like(particle.theta) - particle.log_like.log();
    }
    if (log_prior_ratio) delta += log_prior_ratio(particle.theta);
    shift[i] = delta;
    if (p[i] > 0.0) shift_max = std::max(shift_max, delta);
  }
  if (shift_max == kNegInf) {
    throw std::domain_error("reweight: new density vanishes at every point");
  }

  // Rescale by (sum p) / (sum p ratio) so a constant shift is a bitwise
  // no-op on the weights.
  double s0 = 0.0;
  double s = 0.0;
  ReweightResult out;
  out.weights.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double ratio = std::exp(shift[i] - shift_max);
    out.weights[i] = p[i] * ratio;
    s0 += p[i];
    s += p[i] * ratio;
  }
  if (!(s > 0.0)) {
    throw std::domain_error("reweight: new density vanishes at every point");
  }
  const double rescale = s0 / s;
  if (rescale != 1.0) {
    for (double& w : out.weights) w *= rescale;
  }
  out.log_z = log_z + shift_max + std::log(s / s0);
  out.ess = effective_sample_size(out.weights);
  return out;
}

EvidenceReport summarize(const RunTrace& trace, const VolumeAssignment& volumes,
                         int nsim, std::uint64_t sim_seed) {
  EvidenceReport report;
  report.log_z = log_evidence(trace, volumes).log();
  report.h_nats = kl_divergence(trace, volumes);
  report.ess = effective_sample_size(posterior_weights(trace, volumes));
  report.n_like_calls = trace.n_like_calls;
  report.fingerprint = trace.problem_fingerprint();

  const auto draws = simulate_evidence(trace, nsim, sim_seed);
  const double mean = std::accumulate(draws.begin(), draws.end(), 0.0) / draws.size();
  double var = 0.0;
  for (const double d : draws) var += (d - mean) * (d - mean);
  report.sigma_log_z = std::sqrt(var / (draws.size() - 1));
  return report;
}

}  // namespace nested
