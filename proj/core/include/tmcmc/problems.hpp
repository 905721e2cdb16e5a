#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "tmcmc/random.hpp"
#include "tmcmc/target.hpp"

namespace tmcmc {

class GaussianTarget {
 public:
  GaussianTarget(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

  int dimension() const noexcept { return static_cast<int>(mean_.size()); }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& covariance() const noexcept { return cov_; }
  /// Lower Cholesky factor L with covariance = L L^T.
  Eigen::MatrixXd cholesky() const { return llt_.matrixL(); }

  /// Normalized log N(theta; mean, covariance).
  double log_density(const Eigen::VectorXd& theta) const;
  double log_density_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const;
  /// count x n matrix of exact draws.
  Eigen::MatrixXd sample(long count, Rng& rng) const;
  TargetDensity target() const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_norm_;
};

/// log pi = -theta_1^2 / (2 sigma_1^2) - (theta_2 + b (theta_1^2 - sigma_1^2))^2 / 2,
/// the image of a standard normal under an explicit triangular map.
struct BananaTarget {
  double curvature = 1.0;  ///< b
  double scale = 1.0;      ///< sigma_1

  void validate() const;
  double log_density(const Eigen::VectorXd& theta) const;
  double log_density_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const;
  Eigen::MatrixXd sample(long count, Rng& rng) const;
  double variance_theta2() const { return 1.0 + 2.0 * curvature * curvature * std::pow(scale, 4); }
  TargetDensity target() const;
};

/// Biochemical oxygen demand posterior with flat prior:
/// y(t) = theta_0 (1 - exp(-theta_1 t)) + e, e ~ N(0, noise_variance).
struct BodTarget {
  std::vector<double> times;
  std::vector<double> data;
  double noise_variance = 2e-4;

  static constexpr std::array<double, 2> kTrueParameters{1.0, 0.1};

  /// Twenty times evenly spaced on [1, 5].
  static std::vector<double> default_times();
  static double model(double theta0, double theta1, double t);
  /// Data at the true parameters plus noise drawn from `seed`. Zero noise
  /// gives noiseless data; the likelihood then keeps the default variance.
  static BodTarget synthesize(std::uint64_t seed, double noise_variance = 2e-4);

  double log_density(const Eigen::VectorXd& theta) const;
  double log_density_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const;
  /// Posterior mode by Gauss-Newton from the true parameters.
  Eigen::VectorXd mode() const;
  TargetDensity target() const;

  void write(std::ostream& out) const;
  static BodTarget read(std::istream& in, double noise_variance = 2e-4);
};

struct OdeOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double initial_step = 1e-3;
  std::size_t max_steps = 20000;  ///< per output interval
};

using OdeRhs = std::function<void(const std::vector<double>& y, std::vector<double>& dydt, double t)>;

/// Integrates y' = f(y, t) with an adaptive Dormand-Prince 5(4) pair and
/// returns the state at each requested time (times[0] is the initial time).
/// Returns nullopt when the integrator stalls or the state becomes non-finite.
std::optional<std::vector<std::vector<double>>> integrate_at(const OdeRhs& rhs, std::vector<double> y0,
                                                             std::span<const double> times,
                                                             const OdeOptions& opts = {});

/// Parameters [P(0), Q(0), r, K, s, a, u, v].
using PredPreyParams = std::array<double, 8>;

inline constexpr PredPreyParams kPredPreyTrue{50.0, 5.0, 0.6, 100.0, 1.2, 25.0, 0.5, 0.3};

/// dP/dt = r P (1 - P/K) - s P Q / (a + P), dQ/dt = u P Q / (a + P) - v Q.
std::array<double, 2> predprey_rhs(double p, double q, const PredPreyParams& params);
/// Interior coexistence point (P_f, Q_f); nullopt when u <= v.
std::optional<std::array<double, 2>> predprey_fixed_point(const PredPreyParams& params);
/// Jacobian of the right-hand side, row-major.
std::array<double, 4> predprey_jacobian(double p, double q, const PredPreyParams& params);
/// True when a positive interior fixed point exists and is not a stable
/// equilibrium: det J > 0 and trace J >= 0 up to a relative rounding
/// tolerance. The nominal parameters sit exactly on the trace = 0 boundary.
bool predprey_is_cyclic(const PredPreyParams& params);

/// Posterior over multipliers theta of the nominal parameters, with a box
/// prior [0.001, 50]^8 on theta and the cyclic-solution constraint.
struct PredatorPreyTarget {
  std::vector<double> times;
  std::vector<std::array<double, 2>> data;  ///< (P, Q) at each time
  double noise_variance = 10.0;
  OdeOptions ode;

  static constexpr double kLower = 0.001;
  static constexpr double kUpper = 50.0;

  /// Five times evenly spaced on [0, 50].
  static std::vector<double> default_times();
  static PredPreyParams parameters(const Eigen::VectorXd& theta);
  /// Model (P, Q) at `times`; nullopt on integrator failure.
  std::optional<std::vector<std::array<double, 2>>> solve(const PredPreyParams& params) const;
  /// Same convention as BodTarget::synthesize.
  static PredatorPreyTarget synthesize(std::uint64_t seed, double noise_variance = 10.0);

  double log_density(const Eigen::VectorXd& theta) const;
  TargetDensity target() const;

  void write(std::ostream& out) const;
  static PredatorPreyTarget read(std::istream& in, double noise_variance = 10.0);
};

struct ProblemOptions {
  std::string name;
  std::uint64_t data_seed = 1;
  double correlation = 0.5;  ///< gaussian
  double curvature = 1.0;    ///< banana
  double scale = 1.0;        ///< banana
};

struct Problem {
  TargetDensity target;
  Eigen::VectorXd start;
  /// Writes the observation data as delimited text; empty for analytic targets.
  std::function<void(std::ostream&)> write_dataset;
};

/// Built-in problems: "gaussian", "banana", "bod", "predator-prey".
Problem make_problem(const ProblemOptions& options);
std::vector<std::string> problem_names();

}  // namespace tmcmc
