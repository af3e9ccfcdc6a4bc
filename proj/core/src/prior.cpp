#include "nested/prior.hpp"

#include <sstream>
#include <stdexcept>

#include "nested/special.hpp"

namespace nested {

double transform_uniform(double u, double a, double b) {
  if (!(a < b)) throw std::domain_error("transform_uniform: requires a < b");
  if (!(u >= 0.0 && u <= 1.0)) {
    throw std::domain_error("transform_uniform: u outside [0, 1]");
  }
  return a + u * (b - a);
}

double transform_gaussian(double u, double mu, double sigma) {
  if (!(sigma > 0.0)) throw std::domain_error("transform_gaussian: sigma must be > 0");
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("transform_gaussian: u must lie strictly in (0, 1)");
  }
  return mu + inverse_normal_cdf(u) * sigma;
}

PriorTransform PriorTransform::uniform(int dimension, double a, double b) {
  PriorTransform t;
  for (int i = 0; i < dimension; ++i) t.add_uniform(a, b);
  return t;
}

PriorTransform PriorTransform::gaussian(int dimension, double mu, double sigma) {
  PriorTransform t;
  for (int i = 0; i < dimension; ++i) t.add_gaussian(mu, sigma);
  return t;
}

PriorTransform& PriorTransform::add_uniform(double a, double b) {
  if (!(a < b)) throw std::domain_error("PriorTransform: uniform requires a < b");
  std::ostringstream text;
  text << "uniform(" << a << "," << b << ")";
  dims_.push_back({[a, b](double u) { return transform_uniform(u, a, b); }, text.str()});
  return *this;
}

PriorTransform& PriorTransform::add_gaussian(double mu, double sigma) {
  if (!(sigma > 0.0)) throw std::domain_error("PriorTransform: gaussian requires sigma > 0");
  std::ostringstream text;
  text << "gaussian(" << mu << "," << sigma << ")";
  dims_.push_back(
      {[mu, sigma](double u) { return transform_gaussian(u, mu, sigma); }, text.str()});
  return *this;
}

PriorTransform& PriorTransform::add_custom(Map map, std::string description) {
  if (!map) throw std::invalid_argument("PriorTransform: null custom map");
  dims_.push_back({std::move(map), std::move(description)});
  return *this;
}

void PriorTransform::transform(std::span<const double> u, std::span<double> theta) const {
  if (u.size() != dims_.size() || theta.size() != dims_.size()) {
    throw std::invalid_argument("PriorTransform: dimension mismatch");
  }
  for (std::size_t i = 0; i < dims_.size(); ++i) theta[i] = dims_[i].map(u[i]);
}

std::vector<double> PriorTransform::transform(std::span<const double> u) const {
  std::vector<double> theta(dims_.size());
  transform(u, theta);
  return theta;
}

std::string PriorTransform::description() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i > 0) out << "*";
    out << dims_[i].text;
  }
  return out.str();
}

}  // namespace nested
