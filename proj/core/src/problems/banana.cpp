#include <cmath>
#include <random>

#include "tmcmc/errors.hpp"
#include "tmcmc/problems.hpp"

namespace tmcmc {

void BananaTarget::validate() const {
  if (!std::isfinite(curvature)) throw Error("banana curvature must be finite");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error("banana scale must be positive");
}

double BananaTarget::log_density(const Eigen::VectorXd& theta) const {
  if (theta.size() != 2) throw DimensionError("banana target is two-dimensional");
  const double s2 = scale * scale;
  const double z2 = theta[1] + curvature * (theta[0] * theta[0] - s2);
  return -0.5 * theta[0] * theta[0] / s2 - 0.5 * z2 * z2;
}

double BananaTarget::log_density_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
  if (theta.size() != 2) throw DimensionError("banana target is two-dimensional");
  const double s2 = scale * scale;
  const double z2 = theta[1] + curvature * (theta[0] * theta[0] - s2);
  grad.resize(2);
  grad[0] = -theta[0] / s2 - 2.0 * curvature * theta[0] * z2;
  grad[1] = -z2;
  return -0.5 * theta[0] * theta[0] / s2 - 0.5 * z2 * z2;
}

Eigen::MatrixXd BananaTarget::sample(long count, Rng& rng) const {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd out(count, 2);
  for (long k = 0; k < count; ++k) {
    const double t1 = scale * normal(rng);
    const double z2 = normal(rng);
    out(k, 0) = t1;
    out(k, 1) = z2 - curvature * (t1 * t1 - scale * scale);
  }
  return out;
}

TargetDensity BananaTarget::target() const {
  validate();
  const BananaTarget self = *this;
  TargetDensity t;
  t.name = "banana";
  t.dimension = 2;
  t.log_density = [self](const Eigen::VectorXd& x) { return self.log_density(x); };
  t.log_density_gradient = [self](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    return self.log_density_gradient(x, g);
  };
  return t;
}

}  // namespace tmcmc
