#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nested/logspace.hpp"
#include "nested/trace.hpp"

namespace nested {

enum class VolumeMethod { mean_log, mean, walter, simulated };

std::string to_string(VolumeMethod method);

/// Log-volumes attached to a trace: one per dead point (strictly
/// decreasing, first <= 0), plus the volume remaining at termination.
/// log_x_end is log 0 when no live points survived (kill-one-by-one
/// finalization or a fully consumed run): the last block then closes at
/// zero volume. Final live points share X_end in equal weights X_end/n.
struct VolumeAssignment {
  VolumeMethod method = VolumeMethod::mean_log;
  std::uint64_t sim_seed = 0;
  std::vector<double> log_x;
  double log_x_end = 0.0;
};

/// Computes per-death compression from n = n_active and the plateau
/// multiplicity q (dead points sharing an iteration order form one
/// group, compressed once by Beta(n + 1 - q, q)):
///   mean_log:  E[log t] = -(1/(n+1-q) + ... + 1/n), exactly -1/n at q = 1
///   mean:      t = n/(n+1)          (single deaths only)
///   walter:    t = 1 - 1/n          (single deaths only)
///   simulated: one Beta(n+1-q, q) draw per group from sim_seed
/// Group members are spaced equally in log volume inside the group.
VolumeAssignment assign_volumes(const RunTrace& trace, VolumeMethod method,
                                std::uint64_t sim_seed = 0);

/// log of the generalized evidence sum_i w_i L_i^beta over dead and final
/// points. Block weights: the first block opens at X0 = 1, interior
/// edges sit at midpoints (so interior weights are (X_{i-1} - X_{i+1})/2),
/// and the last dead block closes against the finalization block (at
/// X_end when final points remain, at 0 otherwise); the weights then
/// telescope to exactly X0 = 1, making Z exact for constant likelihoods.
LogValue thermo_evidence(const RunTrace& trace, const VolumeAssignment& volumes,
                         double beta);

/// thermo_evidence at beta = 1 (bit-identical).
LogValue log_evidence(const RunTrace& trace, const VolumeAssignment& volumes);

/// Normalized posterior weights p_i = w_i L_i / Z, ordered dead points
/// first, then final live points. Sums to 1 up to rounding.
std::vector<double> posterior_weights(const RunTrace& trace,
                                      const VolumeAssignment& volumes);

/// Prior-to-posterior KL divergence in nats,
/// H = sum p_i log(p_i / w_i) = sum p_i log L_i - log Z.
double kl_divergence(const RunTrace& trace, const VolumeAssignment& volumes);

/// The cheap error estimate sqrt(H / nlive). Authority rests with
/// simulate_evidence; this is the first-look number.
double evidence_error(double h_nats, std::int64_t nlive);

/// nsamples independent simulated volume assignments, one log Z each.
/// The empirical standard deviation is the authoritative error bar.
std::vector<double> simulate_evidence(const RunTrace& trace, int nsamples,
                                      std::uint64_t seed);

/// (sum p)^2 / sum p^2.
double effective_sample_size(std::span<const double> weights);

/// Posterior mean of f over dead and final points.
double posterior_expectation(const RunTrace& trace, const VolumeAssignment& volumes,
                             const std::function<double(std::span<const double>)>& f);

/// Decomposes a constant-nlive remainder-finalized trace into nlive
/// single-live-point threads by birth lineage, bootstrap-resamples the
/// threads, and returns the standard deviation of posterior_expectation
/// across resamples. Dynamic traces are unsupported (thread decomposition
/// is defined for constant nlive).
double bootstrap_posterior_error(const RunTrace& trace,
                                 const std::function<double(std::span<const double>)>& f,
                                 int nresamples, std::uint64_t seed);

struct ThermoPoint {
  double beta;
  double log_z_beta;
  double mean_energy;
  double heat_capacity;
};

/// <E>(beta) with E = -log L, and C_V = d<E>/dT (T = 1/beta) by centered
/// finite differences on the grid (one-sided at the ends). Needs >= 3
/// grid points.
std::vector<ThermoPoint> mean_energy_and_heat_capacity(
    const RunTrace& trace, const VolumeAssignment& volumes,
    std::span<const double> beta_grid);

struct ReweightResult {
  std::vector<double> weights;  // same ordering and normalization total as input
  double log_z;
  double ess;
};

/// Post-hoc reweighting to a modified likelihood and/or prior:
/// p_i' ∝ p_i exp(Δ_i), log Z' = log Z + log sum p_i exp(Δ_i), where
/// Δ_i = [new_log_like(θ_i) - log L_i] + log_prior_ratio(θ_i); either
/// callback may be null. A constant shift leaves the weights bit-identical.
ReweightResult reweight(
    const RunTrace& trace, const VolumeAssignment& volumes,
    const std::function<double(std::span<const double>)>& new_log_like,
    const std::function<double(std::span<const double>)>& log_prior_ratio);

/// The reporting triplet (and companions) for a finished run.
struct EvidenceReport {
  double log_z = 0.0;
  double sigma_log_z = 0.0;  // std of simulated log Z draws
  double h_nats = 0.0;
  double ess = 0.0;
  std::int64_t n_like_calls = 0;
  std::string fingerprint;
};

EvidenceReport summarize(const RunTrace& trace, const VolumeAssignment& volumes,
                         int nsim = 1000, std::uint64_t sim_seed = 71);

}  // namespace nested
