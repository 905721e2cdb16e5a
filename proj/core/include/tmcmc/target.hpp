#pragma once

#include <functional>
#include <string>

#include <Eigen/Core>

namespace tmcmc {

/// An unnormalized log-density on R^n, optionally with its gradient.
///
/// `log_density` returns a finite value or -infinity (zero density). When
/// `log_density_gradient` is set it must return the same value as
/// `log_density` and write the gradient into its second argument.
struct TargetDensity {
  using LogDensityFn = std::function<double(const Eigen::VectorXd&)>;
  using GradientFn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

  std::string name;
  int dimension = 0;
  LogDensityFn log_density;
  GradientFn log_density_gradient;

  bool has_gradient() const noexcept { return static_cast<bool>(log_density_gradient); }
};

}  // namespace tmcmc
