#include "nested/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nested {

namespace {

// Acklam's rational approximation to the probit function; relative error
// below 1.2e-9 over the full open interval, refined below by one Halley
// step against the erfc-based CDF.
double probit_approx(double u) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  static constexpr double u_low = 0.02425;

  if (u < u_low) {
    const double q = std::sqrt(-2.0 * std::log(u));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (u <= 1.0 - u_low) {
    const double q = u - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log1p(-u));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

// Series for the lower regularized incomplete gamma P(s, x), x < s + 1.
double gamma_p_series(double s, double x) {
  double term = 1.0 / s;
  double sum = term;
  double ap = s;
  for (int k = 0; k < 500; ++k) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

// Lentz continued fraction for Q(s, x), x >= s + 1.
double gamma_q_cf(double s, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
}

}  // namespace

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double inverse_normal_cdf(double u) {
  if (!(u > 0.0) || !(u < 1.0)) {
    throw std::domain_error("inverse_normal_cdf: u must lie strictly in (0, 1)");
  }
  // Reflect the upper half: near 1 the CDF residual cancels to noise, so
  // the refinement must run in the lower tail (1 - u is exact there).
  if (u > 0.5) return -inverse_normal_cdf(1.0 - u);
  double x = probit_approx(u);
  // One Halley refinement against the erfc-based CDF.
  const double e = normal_cdf(x) - u;
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  if (pdf > 0.0) {
    const double r = e / pdf;
    x -= r / (1.0 + 0.5 * x * r);
  }
  return x;
}

double regularized_gamma_q(double s, double x) {
  if (s <= 0.0) throw std::domain_error("regularized_gamma_q: s must be positive");
  if (x < 0.0) throw std::domain_error("regularized_gamma_q: x must be non-negative");
  if (x == 0.0) return 1.0;
  if (x < s + 1.0) return 1.0 - gamma_p_series(s, x);
  return gamma_q_cf(s, x);
}

double chi_squared_sf(double x, int dof) {
  if (dof < 1) throw std::domain_error("chi_squared_sf: dof must be >= 1");
  if (x <= 0.0) return 1.0;
  return regularized_gamma_q(0.5 * dof, 0.5 * x);
}

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_uniform_p_value(std::span<const double> values) {
  if (values.empty()) return 1.0;
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double dmax = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double hi = (i + 1.0) / n - v[i];
    const double lo = v[i] - i / n;
    dmax = std::max({dmax, hi, lo});
  }
  const double sn = std::sqrt(n);
  return kolmogorov_sf(dmax * (sn + 0.12 + 0.11 / sn));
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("ks_two_sample: empty sample");
  }
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  double d = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] <= x) ++i;
    while (j < sb.size() && sb[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_sf(d * (ne + 0.12 + 0.11 / ne))};
}

double chi_squared_uniform_p_value(std::span<const std::int64_t> counts) {
  if (counts.size() < 2) throw std::invalid_argument("chi_squared: need >= 2 bins");
  std::int64_t total = 0;
  for (const auto c : counts) total += c;
  if (total == 0) return 1.0;
  const double expected = static_cast<double>(total) / counts.size();
  double stat = 0.0;
  for (const auto c : counts) {
    const double r = c - expected;
    stat += r * r / expected;
  }
  return chi_squared_sf(stat, static_cast<int>(counts.size()) - 1);
}

double log_unit_ball_volume(int d) {
  if (d < 0) throw std::domain_error("log_unit_ball_volume: d must be >= 0");
  return 0.5 * d * std::log(std::numbers::pi) - std::lgamma(0.5 * d + 1.0);
}

double harmonic_segment(std::int64_t n, std::int64_t q) {
  if (n < 1 || q < 1 || q > n) {
    throw std::domain_error("harmonic_segment: need 1 <= q <= n");
  }
  double sum = 0.0;
  for (std::int64_t j = n + 1 - q; j <= n; ++j) sum += 1.0 / static_cast<double>(j);
  return sum;
}

}  // namespace nested
