#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>

#include "nested/problem.hpp"
#include "nested/rng.hpp"

using namespace nested;

TEST_CASE("truncated gaussian likelihood and analytic oracle") {
  const Problem problem = truncated_gaussian(5.0, 2);
  CHECK(problem.log_like(std::vector<double>{0.0, 0.0}).log() == 0.0);
  CHECK(problem.log_like(std::vector<double>{1.0, 1.0}).log() == doctest::Approx(-2.0));
  // log Z = log pi - 2 log 10 = -3.4604...; H = -1 - log pi + 2 log 10.
  CHECK(*problem.oracle().log_z ==
        doctest::Approx(std::log(std::numbers::pi) - 2.0 * std::log(10.0)).epsilon(1e-12));
  CHECK(*problem.oracle().log_z == doctest::Approx(-3.46).epsilon(1e-3));
  CHECK(*problem.oracle().kl_nats == doctest::Approx(2.46).epsilon(1e-3));
  CHECK_THROWS_AS(truncated_gaussian(0.5, 2), std::domain_error);
}

TEST_CASE("cone volume oracle is the inscribed-ball area ratio") {
  const Problem problem = cone_volume_problem(2);
  // r = 0.5: X = pi 0.25 / 4.
  const auto x_half = problem.oracle().log_x_of_loglike(-0.25);
  REQUIRE(x_half.has_value());
  CHECK(*x_half == doctest::Approx(std::log(std::numbers::pi * 0.25 / 4.0)).epsilon(1e-12));
  CHECK(std::exp(*x_half) == doctest::Approx(0.19635).epsilon(1e-4));
  // r = 1: the full inscribed disc.
  const auto x_one = problem.oracle().log_x_of_loglike(-1.0);
  REQUIRE(x_one.has_value());
  CHECK(std::exp(*x_one) == doctest::Approx(std::numbers::pi / 4.0).epsilon(1e-12));
  // lambda -> 0-: X -> 0.
  const auto x_tiny = problem.oracle().log_x_of_loglike(-1e-12);
  REQUIRE(x_tiny.has_value());
  CHECK(std::exp(*x_tiny) < 1e-11);
  // Outside validity (ball clipped by the box) the oracle declines.
  CHECK_FALSE(problem.oracle().log_x_of_loglike(-1.5).has_value());
}

TEST_CASE("X(lambda) oracles are monotone non-increasing and within [0, 1]") {
  for (const auto& problem :
       {truncated_gaussian(5.0, 2), cone_volume_problem(3), harmonic_energy(5.0, 2)}) {
    double prev = 0.0;  // log X at lambda -> -infinity-ish start
    bool first = true;
    for (double lam = -0.9; lam < -1e-6; lam += 0.05) {
      const auto lx = problem.oracle().log_x_of_loglike(lam);
      if (!lx) continue;
      CHECK(*lx <= 1e-12);
      if (!first) CHECK(*lx <= prev + 1e-12);
      prev = *lx;
      first = false;
    }
  }
}

TEST_CASE("plateau problem: finite sum oracle and preconditions") {
  const std::vector<std::pair<double, double>> levels = {
      {std::log(1.0), 0.9}, {std::log(2.0), 0.09}, {std::log(3.0), 0.01}};
  const Problem problem = plateau_problem(levels);
  CHECK(*problem.oracle().log_z == doctest::Approx(std::log(1.11)).epsilon(1e-12));
  CHECK(*problem.oracle().log_z == doctest::Approx(0.10436).epsilon(1e-4));

  // Likelihood is piecewise constant on the stated fractions.
  CHECK(problem.log_like(std::vector<double>{0.5}).log() == std::log(1.0));
  CHECK(problem.log_like(std::vector<double>{0.95}).log() == std::log(2.0));
  CHECK(problem.log_like(std::vector<double>{0.995}).log() == std::log(3.0));

  // Single level: log Z = log c.
  const Problem single = plateau_problem({{std::log(4.0), 1.0}});
  CHECK(*single.oracle().log_z == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  // Non-increasing levels and malformed fractions are rejected.
  CHECK_THROWS_AS(plateau_problem({{std::log(1.0), 0.5}, {std::log(1.0), 0.5}}),
                  std::domain_error);
  CHECK_THROWS_AS(plateau_problem({{0.0, 0.4}, {1.0, 0.4}}), std::domain_error);
  CHECK_THROWS_AS(plateau_problem({{0.0, -0.5}, {1.0, 1.5}}), std::domain_error);
}

TEST_CASE("harmonic energy: equipartition-regime partition function") {
  const Problem problem = harmonic_energy(5.0, 2);
  CHECK(problem.log_like(std::vector<double>{0.0, 0.0}).log() == 0.0);
  // Z(1) = 2 pi / 100.
  CHECK(problem.oracle().log_z_of_beta(1.0) ==
        doctest::Approx(std::log(2.0 * std::numbers::pi / 100.0)).epsilon(1e-12));
  CHECK(std::exp(problem.oracle().log_z_of_beta(1.0)) ==
        doctest::Approx(0.06283).epsilon(1e-3));
  // Verified independently by 2-D quadrature.
  CHECK(quadrature_log_z_2d(problem, -5.0, 5.0, 512) ==
        doctest::Approx(problem.oracle().log_z_of_beta(1.0)).epsilon(1e-4));
  CHECK_THROWS_AS(harmonic_energy(-1.0, 2), std::domain_error);
}

TEST_CASE("quadrature oracle reproduces the analytic gaussian evidence") {
  const Problem problem = truncated_gaussian(5.0, 2);
  CHECK(quadrature_log_z_2d(problem, -5.0, 5.0, 512) ==
        doctest::Approx(*problem.oracle().log_z).epsilon(1e-9));
}

TEST_CASE("standard suite carries Richardson-checked quadrature oracles") {
  const auto suite = standard_suite();
  REQUIRE(suite.size() == 3);

  // Frozen 4096^2 grid values; regression anchors for the suite constants.
  CHECK(*suite[0].oracle().log_z == doctest::Approx(235.855940332254).epsilon(1e-9));
  CHECK(*suite[1].oracle().log_z == doctest::Approx(-6.575072147893).epsilon(1e-6));
  CHECK(*suite[2].oracle().log_z == doctest::Approx(-1.745641884548).epsilon(1e-6));

  // Richardson check: the 2048^2 grid agrees to a relative 1e-4.
  CHECK(quadrature_log_z_2d(eggbox_problem(), 0.0, 10.0 * std::numbers::pi, 2048) ==
        doctest::Approx(*suite[0].oracle().log_z).epsilon(1e-4));
  CHECK(quadrature_log_z_2d(rosenbrock_problem(), -5.0, 10.0, 2048) ==
        doctest::Approx(*suite[1].oracle().log_z).epsilon(1e-4));
  CHECK(quadrature_log_z_2d(gaussian_shells_problem(), -6.0, 6.0, 2048) ==
        doctest::Approx(*suite[2].oracle().log_z).epsilon(1e-4));
}

TEST_CASE("two identical shells are exactly symmetric in x") {
  const Problem shells = gaussian_shells_problem();
  RngStream rng(3, 0);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-6.0, 6.0);
    const double y = rng.uniform(-6.0, 6.0);
    CHECK(shells.log_like(std::vector<double>{x, y}).log() ==
          shells.log_like(std::vector<double>{-x, y}).log());
  }
}

TEST_CASE("analytic oracles agree with hit-or-miss Monte Carlo within 4 SE") {
  struct Case {
    Problem problem;
    double log_z;
  };
  const std::vector<std::pair<double, double>> levels = {
      {std::log(1.0), 0.9}, {std::log(2.0), 0.09}, {std::log(3.0), 0.01}};
  const Case cases[] = {
      {truncated_gaussian(5.0, 2), *truncated_gaussian(5.0, 2).oracle().log_z},
      {cone_volume_problem(2), *cone_volume_problem(2).oracle().log_z},
      {plateau_problem(levels), *plateau_problem(levels).oracle().log_z},
      {harmonic_energy(5.0, 2), *harmonic_energy(5.0, 2).oracle().log_z},
  };
  const long n = 10'000'000;
  for (const auto& c : cases) {
    RngStream rng(101, 0);
    const int d = c.problem.dimension();
    std::vector<double> u(d);
    std::vector<double> theta(d);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (long i = 0; i < n; ++i) {
      for (int k = 0; k < d; ++k) u[k] = rng.uniform();
      c.problem.prior().transform(u, theta);
      const double like = std::exp(c.problem.log_like(theta).log());
      sum += like;
      sum_sq += like * like;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / n);
    CHECK(std::abs(mean - std::exp(c.log_z)) < 4.0 * se);
  }
}
