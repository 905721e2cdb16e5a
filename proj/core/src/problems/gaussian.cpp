#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "tmcmc/errors.hpp"
#include "tmcmc/problems.hpp"

namespace tmcmc {

GaussianTarget::GaussianTarget(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
    : mean_(std::move(mean)), cov_(std::move(covariance)) {
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size() || mean_.size() == 0) {
    throw DimensionError("covariance must be square and match the mean");
  }
  if (!cov_.isApprox(cov_.transpose(), 1e-12)) throw Error("covariance must be symmetric");
  llt_.compute(cov_);
  if (llt_.info() != Eigen::Success) throw Error("covariance is not positive definite");
  const Eigen::MatrixXd l = llt_.matrixL();
  log_norm_ = -0.5 * static_cast<double>(mean_.size()) * std::log(2.0 * std::numbers::pi) -
              l.diagonal().array().log().sum();
}

double GaussianTarget::log_density(const Eigen::VectorXd& theta) const {
  if (theta.size() != mean_.size()) throw DimensionError("point has the wrong dimension");
  const Eigen::VectorXd z = llt_.matrixL().solve(theta - mean_);
  return log_norm_ - 0.5 * z.squaredNorm();
}

double GaussianTarget::log_density_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
  if (theta.size() != mean_.size()) throw DimensionError("point has the wrong dimension");
  grad = -llt_.solve(theta - mean_);
  return log_density(theta);
}

Eigen::MatrixXd GaussianTarget::sample(long count, Rng& rng) const {
  std::normal_distribution<double> normal;
  const Eigen::MatrixXd l = llt_.matrixL();
  Eigen::MatrixXd out(count, dimension());
  Eigen::VectorXd z(dimension());
  for (long k = 0; k < count; ++k) {
    for (int j = 0; j < dimension(); ++j) z[j] = normal(rng);
    out.row(k) = (mean_ + l * z).transpose();
  }
  return out;
}

TargetDensity GaussianTarget::target() const {
  auto self = std::make_shared<const GaussianTarget>(*this);
  TargetDensity t;
  t.name = "gaussian";
  t.dimension = dimension();
  t.log_density = [self](const Eigen::VectorXd& x) { return self->log_density(x); };
  t.log_density_gradient = [self](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    return self->log_density_gradient(x, g);
  };
  return t;
}

}  // namespace tmcmc
