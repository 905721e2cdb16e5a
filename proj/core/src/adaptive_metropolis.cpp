#include "tmcmc/adaptive_metropolis.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Cholesky>

#include "tmcmc/errors.hpp"
#include "tmcmc/random.hpp"

namespace tmcmc {

void AdaptiveMetropolisConfig::validate() const {
  if (steps < 1) throw Error("chain length must be positive");
  if (burn_in < 0 || burn_in >= steps) throw Error("burn-in must lie in [0, steps)");
  if (!(initial_scale > 0.0)) throw Error("initial scale must be positive");
  if (adapt_start < 2) throw Error("adaptation start must be at least 2");
  if (!(epsilon >= 0.0)) throw Error("epsilon must be non-negative");
  if (tune_interval < 1) throw Error("tune interval must be positive");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) {
    throw Error("target acceptance must lie in (0, 1)");
  }
}

ChainResult run_adaptive_metropolis(const AdaptiveMetropolisConfig& cfg, const TargetDensity& target,
                                    const Eigen::VectorXd& theta0) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();
  const int n = target.dimension;
  if (theta0.size() != n) throw DimensionError("start point has the wrong dimension");

  ChainResult res;
  res.method = "am";
  res.seed = cfg.seed;
  res.burn_in = cfg.burn_in;
  res.samples.resize(cfg.steps, n);
  res.accepted_stage.assign(static_cast<std::size_t>(cfg.steps), 0);
  res.evaluations.assign(static_cast<std::size_t>(cfg.steps), 1);

  Rng rng(cfg.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;

  Eigen::VectorXd theta = theta0;
  double lp = target.log_density(theta);
  if (!std::isfinite(lp)) throw Error("target density is zero or undefined at the start point");

  const double sd = 2.4 * 2.4 / static_cast<double>(n);
  double scale = cfg.initial_scale;
  Eigen::MatrixXd chol = Eigen::MatrixXd::Identity(n, n) * scale;
  // Running mean and scatter of theta_0..theta_k (Welford).
  Eigen::VectorXd mean = theta;
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(n, n);
  long count = 1;
  long batch = 0, batch_acc = 0;
  Eigen::VectorXd z(n);

  for (long k = 0; k < cfg.steps; ++k) {
    for (int j = 0; j < n; ++j) z[j] = normal(rng);
    const Eigen::VectorXd prop = theta + chol.triangularView<Eigen::Lower>() * z;
    double lp_new = target.log_density(prop);
    if (std::isnan(lp_new)) lp_new = -std::numeric_limits<double>::infinity();
    const double u = unif(rng);
    const bool accept = lp_new > -std::numeric_limits<double>::infinity() && std::log(u) < lp_new - lp;
    if (accept) {
      theta = prop;
      lp = lp_new;
      res.accepted_stage[static_cast<std::size_t>(k)] = 1;
      ++res.stage_accepts[0];
    }
    ++res.stage_attempts[0];
    res.samples.row(k) = theta.transpose();

    ++count;
    const Eigen::VectorXd delta = theta - mean;
    mean += delta / static_cast<double>(count);
    scatter += delta * (theta - mean).transpose();

    if (k + 1 < cfg.adapt_start) {
      if (cfg.tune && k < cfg.burn_in) {
        ++batch;
        batch_acc += accept;
        if (batch >= cfg.tune_interval) {
          scale *= std::exp(2.0 * (static_cast<double>(batch_acc) / static_cast<double>(batch) -
                                   cfg.target_acceptance));
          chol = Eigen::MatrixXd::Identity(n, n) * scale;
          batch = batch_acc = 0;
        }
      }
    } else {
      Eigen::MatrixXd cov = scatter / static_cast<double>(count - 1);
      cov.diagonal().array() += cfg.epsilon;
      Eigen::LLT<Eigen::MatrixXd> llt(sd * cov);
      if (llt.info() == Eigen::Success) chol = llt.matrixL();
    }
  }
  res.scale_factor = scale;
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return res;
}

}  // namespace tmcmc
