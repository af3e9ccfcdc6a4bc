#include "nested/problem.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "nested/special.hpp"

namespace nested {

Problem::Problem(std::string name, PriorTransform prior, LogLikeFn log_like,
                 Oracle oracle)
    : name_(std::move(name)),
      prior_(std::move(prior)),
      log_like_(std::move(log_like)),
      oracle_(std::move(oracle)) {
  if (!log_like_) throw std::invalid_argument("Problem: null likelihood");
  if (prior_.dimension() < 1) throw std::invalid_argument("Problem: empty prior");
}

LogValue Problem::log_like(std::span<const double> theta) const {
  if (static_cast<int>(theta.size()) != dimension()) {
    throw std::invalid_argument("Problem::log_like: dimension mismatch");
  }
  return LogValue(log_like_(theta));
}

std::string Problem::fingerprint() const {
  return name_ + ";prior=" + prior_.description();
}

Problem truncated_gaussian(double a, int d) {
  if (!(a >= 1.0) || d < 1) {
    throw std::domain_error("truncated_gaussian: requires a >= 1 and d >= 1");
  }
  std::ostringstream name;
  name << "gaussian(a=" << a << ",d=" << d << ")";
  const double log_prior_cell = d * std::log(2.0 * a);
  Oracle oracle;
  oracle.log_z = 0.5 * d * std::log(std::numbers::pi) - log_prior_cell;
  oracle.kl_nats = -0.5 * d - 0.5 * d * std::log(std::numbers::pi) + log_prior_cell;
  oracle.log_x_of_loglike = [d, a, log_prior_cell](double lam) -> std::optional<double> {
    if (lam > 0.0) return std::nullopt;
    const double r2 = -lam;
    if (r2 > a * a) return std::nullopt;  // ball clipped by the prior box
    return log_unit_ball_volume(d) + 0.5 * d * std::log(r2) - log_prior_cell;
  };
  return Problem(name.str(), PriorTransform::uniform(d, -a, a),
                 [](std::span<const double> theta) {
                   double s = 0.0;
                   for (const double t : theta) s += t * t;
                   return -s;
                 },
                 std::move(oracle));
}

Problem cone_volume_problem(int d) {
  if (d < 1) throw std::domain_error("cone_volume_problem: requires d >= 1");
  std::ostringstream name;
  name << "cone(d=" << d << ")";
  Oracle oracle;
  oracle.log_z = d * std::log(0.5 * std::sqrt(std::numbers::pi) * std::erf(1.0));
  oracle.log_x_of_loglike = [d](double lam) -> std::optional<double> {
    if (lam > 0.0) return std::nullopt;
    const double r2 = -lam;
    if (r2 > 1.0) return std::nullopt;
    return log_unit_ball_volume(d) + 0.5 * d * std::log(r2) - d * std::log(2.0);
  };
  return Problem(name.str(), PriorTransform::uniform(d, -1.0, 1.0),
                 [](std::span<const double> theta) {
                   double s = 0.0;
                   for (const double t : theta) s += t * t;
                   return -s;
                 },
                 std::move(oracle));
}

Problem plateau_problem(const std::vector<std::pair<double, double>>& levels) {
  if (levels.empty()) throw std::domain_error("plateau_problem: no levels");
  double total = 0.0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (!(levels[k].second > 0.0)) {
      throw std::domain_error("plateau_problem: fractions must be positive");
    }
    if (k > 0 && !(levels[k].first > levels[k - 1].first)) {
      throw std::domain_error("plateau_problem: log-likelihoods must strictly increase");
    }
    total += levels[k].second;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::domain_error("plateau_problem: fractions must sum to 1");
  }

  std::vector<double> cumulative(levels.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    acc += levels[k].second;
    cumulative[k] = acc;
  }
  cumulative.back() = 1.0;

  LogSum z;
  for (const auto& [log_l, frac] : levels) {
    z.add(LogValue(log_l + std::log(frac)));
  }
  const double log_z = z.total().log();

  double kl = 0.0;
  for (const auto& [log_l, frac] : levels) {
    const double p = std::exp(log_l + std::log(frac) - log_z);
    if (p > 0.0) kl += p * (log_l - log_z);
  }

  Oracle oracle;
  oracle.log_z = log_z;
  oracle.kl_nats = kl;
  auto level_copy = levels;
  oracle.log_x_of_loglike = [level_copy](double lam) -> std::optional<double> {
    double mass = 0.0;
    for (const auto& [log_l, frac] : level_copy) {
      if (log_l > lam) mass += frac;
    }
    return mass > 0.0 ? std::optional<double>(std::log(mass)) : std::nullopt;
  };

  std::ostringstream name;
  name << "plateau(";
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (k > 0) name << ",";
    name << levels[k].first << ":" << levels[k].second;
  }
  name << ")";

  return Problem(name.str(), PriorTransform::uniform(1, 0.0, 1.0),
                 [levels, cumulative](std::span<const double> theta) {
                   const double x = theta[0];
                   for (std::size_t k = 0; k < cumulative.size(); ++k) {
                     if (x < cumulative[k]) return levels[k].first;
                   }
                   return levels.back().first;
                 },
                 std::move(oracle));
}

Problem harmonic_energy(double a, int d) {
  if (!(a > 0.0) || d < 1) {
    throw std::domain_error("harmonic_energy: requires a > 0 and d >= 1");
  }
  std::ostringstream name;
  name << "harmonic(a=" << a << ",d=" << d << ")";
  const double log_prior_cell = d * std::log(2.0 * a);
  Oracle oracle;
  oracle.log_z_of_beta = [d, log_prior_cell](double beta) {
    return 0.5 * d * std::log(2.0 * std::numbers::pi / beta) - log_prior_cell;
  };
  oracle.log_z = oracle.log_z_of_beta(1.0);
  oracle.kl_nats = -0.5 * d - *oracle.log_z;
  oracle.log_x_of_loglike = [d, a, log_prior_cell](double lam) -> std::optional<double> {
    if (lam > 0.0) return std::nullopt;
    const double r2 = -2.0 * lam;
    if (r2 > a * a) return std::nullopt;
    return log_unit_ball_volume(d) + 0.5 * d * std::log(r2) - log_prior_cell;
  };
  return Problem(name.str(), PriorTransform::uniform(d, -a, a),
                 [](std::span<const double> theta) {
                   double e = 0.0;
                   for (const double t : theta) e += 0.5 * t * t;
                   return -e;
                 },
                 std::move(oracle));
}

double quadrature_log_z_2d(const Problem& problem, double lo, double hi, int n) {
  if (problem.dimension() != 2) {
    throw std::invalid_argument("quadrature_log_z_2d: problem must be 2-D");
  }
  if (n < 2) throw std::invalid_argument("quadrature_log_z_2d: n must be >= 2");
  const double h = (hi - lo) / (n - 1);
  LogSum sum;
  double theta[2];
  for (int i = 0; i < n; ++i) {
    theta[0] = lo + i * h;
    const double wi = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    for (int j = 0; j < n; ++j) {
      theta[1] = lo + j * h;
      const double wj = (j == 0 || j == n - 1) ? 0.5 : 1.0;
      const double log_l = problem.log_like(std::span<const double>(theta, 2)).log();
      sum.add(LogValue(log_l + std::log(wi * wj)));
    }
  }
  // Normalize by the prior box area.
  return sum.total().log() + 2.0 * std::log(h) - 2.0 * std::log(hi - lo);
}

namespace {

Problem bare_eggbox() {
  return Problem("eggbox", PriorTransform::uniform(2, 0.0, 10.0 * std::numbers::pi),
                 [](std::span<const double> theta) {
                   const double c = 2.0 + std::cos(0.5 * theta[0]) * std::cos(0.5 * theta[1]);
                   return std::pow(c, 5.0);
                 });
}

Problem bare_rosenbrock() {
  return Problem("rosenbrock", PriorTransform::uniform(2, -5.0, 10.0),
                 [](std::span<const double> theta) {
                   const double x = theta[0];
                   const double y = theta[1];
                   const double a = 1.0 - x;
                   const double b = y - x * x;
                   return -(a * a + 100.0 * b * b);
                 });
}

Problem bare_shells() {
  constexpr double kRadius = 2.0;
  constexpr double kWidth = 0.1;
  constexpr double kCenter = 3.5;
  const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * kWidth * kWidth);
  return Problem("shells", PriorTransform::uniform(2, -6.0, 6.0),
                 [log_norm](std::span<const double> theta) {
                   const auto shell = [&](double cx) {
                     const double dx = theta[0] - cx;
                     const double dy = theta[1];
                     const double dr = std::sqrt(dx * dx + dy * dy) - kRadius;
                     return log_norm - dr * dr / (2.0 * kWidth * kWidth);
                   };
                   return log_add(LogValue(shell(kCenter)), LogValue(shell(-kCenter))).log();
                 });
}

Problem with_quadrature_oracle(Problem base, double lo, double hi, double cached_log_z) {
  Oracle oracle;
  oracle.log_z = cached_log_z;
  return Problem(base.name(), base.prior(),
                 [base](std::span<const double> theta) { return base.log_like(theta).log(); },
                 std::move(oracle));
}

}  // namespace

Problem eggbox_problem() {
  static const double log_z =
      quadrature_log_z_2d(bare_eggbox(), 0.0, 10.0 * std::numbers::pi, 4096);
  return with_quadrature_oracle(bare_eggbox(), 0.0, 10.0 * std::numbers::pi, log_z);
}

Problem rosenbrock_problem() {
  static const double log_z = quadrature_log_z_2d(bare_rosenbrock(), -5.0, 10.0, 4096);
  return with_quadrature_oracle(bare_rosenbrock(), -5.0, 10.0, log_z);
}

Problem gaussian_shells_problem() {
  static const double log_z = quadrature_log_z_2d(bare_shells(), -6.0, 6.0, 4096);
  return with_quadrature_oracle(bare_shells(), -6.0, 6.0, log_z);
}

std::vector<Problem> standard_suite() {
  std::vector<Problem> suite;
  suite.push_back(eggbox_problem());
  suite.push_back(rosenbrock_problem());
  suite.push_back(gaussian_shells_problem());
  return suite;
}

}  // namespace nested
