#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "tmcmc/mcmc.hpp"
#include "tmcmc/target.hpp"

namespace tmcmc {

/// Adaptive random-walk Metropolis baseline: after `adapt_start` steps the
/// proposal covariance is (2.4^2 / n) (Cov(theta_0..theta_k) + epsilon I).
struct AdaptiveMetropolisConfig {
  long steps = 10000;
  long burn_in = 0;
  std::uint64_t seed = 0;
  double initial_scale = 0.1;  ///< initial covariance initial_scale^2 I
  long adapt_start = 1000;
  double epsilon = 1e-10;
  /// Before `adapt_start`, the initial scale is tuned toward this rate.
  bool tune = true;
  double target_acceptance = 0.3;
  long tune_interval = 50;

  void validate() const;
};

ChainResult run_adaptive_metropolis(const AdaptiveMetropolisConfig& cfg, const TargetDensity& target,
                                    const Eigen::VectorXd& theta0);

}  // namespace tmcmc
