#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace nested {

/// theta = a + u (b - a); requires 0 <= u <= 1 and a < b.
double transform_uniform(double u, double a, double b);

/// theta = mu + Phi^{-1}(u) sigma; requires 0 < u < 1 and sigma > 0.
/// u of exactly 0 or 1 is rejected rather than clamped: silently clamping
/// the infinite tails would bias tail compression estimates.
double transform_gaussian(double u, double mu, double sigma);

/// Per-dimension monotone maps from the unit hypercube to parameter
/// space (the inverse-transformation method). Samplers always operate in
/// the hypercube; every likelihood sees transformed coordinates.
///
/// NS needs a *proper* prior: each per-dimension map must be a monotone
/// non-decreasing transform of Uniform(0,1) with finite total mass.
/// User-supplied maps are trusted; impropriety is not detectable here.
class PriorTransform {
 public:
  using Map = std::function<double(double)>;

  static PriorTransform uniform(int dimension, double a, double b);
  static PriorTransform gaussian(int dimension, double mu, double sigma);

  PriorTransform() = default;

  PriorTransform& add_uniform(double a, double b);
  PriorTransform& add_gaussian(double mu, double sigma);
  PriorTransform& add_custom(Map map, std::string description = "custom");

  int dimension() const { return static_cast<int>(dims_.size()); }

  /// Applies the per-dimension maps; u and theta must have length
  /// dimension().
  void transform(std::span<const double> u, std::span<double> theta) const;
  std::vector<double> transform(std::span<const double> u) const;

  std::string description() const;

 private:
  struct Dim {
    Map map;
    std::string text;
  };
  std::vector<Dim> dims_;
};

}  // namespace nested
