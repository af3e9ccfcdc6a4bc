#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "nested/prior.hpp"
#include "nested/rng.hpp"
#include "nested/special.hpp"

using namespace nested;

TEST_CASE("transform_uniform maps endpoints and midpoints linearly") {
  CHECK(transform_uniform(0.5, -5.0, 5.0) == doctest::Approx(0.0));
  CHECK(transform_uniform(0.0, -5.0, 5.0) == -5.0);
  CHECK(transform_uniform(0.75, 0.0, 4.0) == doctest::Approx(3.0));
  CHECK_THROWS_AS(transform_uniform(0.5, 2.0, 2.0), std::domain_error);
  CHECK_THROWS_AS(transform_uniform(1.5, 0.0, 1.0), std::domain_error);
}

TEST_CASE("transform_gaussian hits the quantiles") {
  CHECK(transform_gaussian(0.5, 3.25, 2.0) == doctest::Approx(3.25).epsilon(1e-12));
  // Phi(1) = 0.8413447...; oracle is the numerical root of the erf CDF.
  CHECK(transform_gaussian(0.8413447, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-5));
  // Phi(-2) = 0.0227501...
  CHECK(transform_gaussian(0.0227501, 2.0, 3.0) == doctest::Approx(-4.0).epsilon(1e-4));
  CHECK_THROWS_AS(transform_gaussian(0.0, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(transform_gaussian(1.0, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(transform_gaussian(0.5, 0.0, 0.0), std::domain_error);
}

TEST_CASE("round trip F(T(u)) = u to 1e-9 on a 1e3 grid") {
  const double a = -2.0;
  const double b = 7.0;
  const double mu = 1.5;
  const double sigma = 0.8;
  for (int i = 1; i < 1000; ++i) {
    const double u = i / 1000.0;
    const double x_uniform = transform_uniform(u, a, b);
    CHECK(std::abs((x_uniform - a) / (b - a) - u) < 1e-9);
    const double x_gauss = transform_gaussian(u, mu, sigma);
    CHECK(std::abs(normal_cdf((x_gauss - mu) / sigma) - u) < 1e-9);
  }
}

TEST_CASE("gaussian pushforward of 1e5 uniforms passes the moment check") {
  RngStream rng(31, 0);
  const double mu = -1.0;
  const double sigma = 2.5;
  const int n = 100000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = transform_gaussian(rng.uniform_open(), mu, sigma);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean - mu) < 4.0 * sigma / std::sqrt(n));
  CHECK(var == doctest::Approx(sigma * sigma).epsilon(0.05));
}

TEST_CASE("PriorTransform applies per-dimension maps") {
  PriorTransform prior;
  prior.add_uniform(-5.0, 5.0).add_gaussian(0.0, 1.0).add_custom(
      [](double u) { return u * u; }, "square");
  CHECK(prior.dimension() == 3);
  const std::vector<double> u = {0.5, 0.5, 0.5};
  const auto theta = prior.transform(u);
  CHECK(theta[0] == doctest::Approx(0.0));
  CHECK(theta[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(theta[2] == doctest::Approx(0.25));
  CHECK_THROWS(prior.transform(std::vector<double>{0.5}));
}

TEST_CASE("factory helpers replicate one map per dimension") {
  const auto box = PriorTransform::uniform(3, -1.0, 1.0);
  CHECK(box.dimension() == 3);
  const auto theta = box.transform(std::vector<double>{0.0, 0.5, 1.0});
  CHECK(theta[0] == -1.0);
  CHECK(theta[1] == doctest::Approx(0.0));
  CHECK(theta[2] == 1.0);
}
