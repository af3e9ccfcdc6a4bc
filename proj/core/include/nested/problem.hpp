#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nested/logspace.hpp"
#include "nested/prior.hpp"

namespace nested {

/// Reference answers attached to a benchmark problem. log_x_of_loglike
/// returns log X(lambda), the log prior mass enclosed by the contour, or
/// nullopt outside the formula's validity range. log_z_of_beta is the
/// log partition function for problems posed as energies (log L = -E).
struct Oracle {
  std::optional<double> log_z;
  std::optional<double> kl_nats;
  std::function<std::optional<double>(double)> log_x_of_loglike;
  std::function<double(double)> log_z_of_beta;
};

/// A benchmark integrand: a prior transform plus a deterministic
/// log-likelihood over transformed coordinates.
class Problem {
 public:
  using LogLikeFn = std::function<double(std::span<const double>)>;

  Problem(std::string name, PriorTransform prior, LogLikeFn log_like,
          Oracle oracle = {});

  int dimension() const { return prior_.dimension(); }
  const std::string& name() const { return name_; }
  const PriorTransform& prior() const { return prior_; }
  const Oracle& oracle() const { return oracle_; }

  LogValue log_like(std::span<const double> theta) const;

  /// "name(params);prior=..." — the problem half of a run fingerprint.
  std::string fingerprint() const;

 private:
  std::string name_;
  PriorTransform prior_;
  LogLikeFn log_like_;
  Oracle oracle_;
};

/// Uniform prior on [-a, a]^d with log L = -sum theta_i^2.
/// Oracle (valid for a >~ 3): log Z = (d/2) log pi - d log(2a),
/// H = -d/2 - (d/2) log pi + d log(2a).
Problem truncated_gaussian(double a, int d);

/// Uniform prior on [-1, 1]^d with log L = -r^2, r = |theta|.
/// Oracle X(lambda) = V_d (-lambda)^{d/2} / 2^d for sqrt(-lambda) <= 1.
Problem cone_volume_problem(int d);

/// 1-D uniform prior on [0, 1] partitioned into contiguous intervals of
/// the given fractions, with constant log-likelihood on each. Fractions
/// must be positive and sum to 1; log-likelihoods strictly increasing.
/// Oracle log Z = log sum L_k f_k.
Problem plateau_problem(const std::vector<std::pair<double, double>>& levels);

/// Uniform prior on [-a, a]^d with energy E = |theta|^2 / 2 exposed as
/// log L = -E. Oracle Z(beta) = (2 pi / beta)^{d/2} / (2a)^d, valid when
/// beta a^2 >> 1.
Problem harmonic_energy(double a, int d);

/// The 2-D benchmark trio with quadrature oracles (4096^2 trapezoid grid,
/// Richardson-checked against 2048^2). Constants, chosen here and fixed:
///   eggbox:     log L = (2 + cos(x/2) cos(y/2))^5 on [0, 10 pi]^2
///   rosenbrock: log L = -[(1 - x)^2 + 100 (y - x^2)^2] on [-5, 10]^2
///   shells:     two Gaussian shells, centers (+/-3.5, 0), radius 2,
///               width 0.1, on [-6, 6]^2
Problem eggbox_problem();
Problem rosenbrock_problem();
Problem gaussian_shells_problem();

/// eggbox, rosenbrock, shells.
std::vector<Problem> standard_suite();

/// log Z of a 2-D problem by trapezoid quadrature of exp(log L) over the
/// prior box on an n x n grid, in log space. The suite oracles use
/// n = 4096 with a Richardson check at n = 2048.
double quadrature_log_z_2d(const Problem& problem, double lo, double hi, int n);

}  // namespace nested
