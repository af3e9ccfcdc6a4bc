#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace nested {

/// Inverse of the standard normal CDF, accurate to better than 1e-9
/// absolute on u in [1e-15, 1 - 1e-15]. Throws std::domain_error for
/// u <= 0 or u >= 1 (the tails are infinite).
double inverse_normal_cdf(double u);

/// Standard normal CDF via erfc (tail-stable).
double normal_cdf(double x);

/// Regularized upper incomplete gamma Q(s, x) = Gamma(s, x) / Gamma(s).
double regularized_gamma_q(double s, double x);

/// Survival function of the chi-squared distribution with dof degrees
/// of freedom, P(X > x).
double chi_squared_sf(double x, int dof);

/// Kolmogorov distribution survival function
/// Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_sf(double lambda);

/// One-sample Kolmogorov-Smirnov test of values against Uniform(0,1).
/// Returns the asymptotic p-value (with the Stephens small-sample
/// correction). Input need not be sorted.
double ks_uniform_p_value(std::span<const double> values);

struct KsResult {
  double statistic;
  double p_value;
};

/// Two-sample Kolmogorov-Smirnov test. Asymptotic p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Pearson chi-squared test of counts against equal expected occupancy.
/// Returns the p-value for (bins - 1) degrees of freedom.
double chi_squared_uniform_p_value(std::span<const std::int64_t> counts);

/// log of the volume of the unit d-ball, log(pi^{d/2} / Gamma(d/2 + 1)).
double log_unit_ball_volume(int d);

/// Harmonic partial sum 1/(n+1-q) + ... + 1/n; equals -E[log Beta(n+1-q, q)].
double harmonic_segment(std::int64_t n, std::int64_t q);

}  // namespace nested
