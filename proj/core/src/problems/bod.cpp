#include <cmath>
#include <iomanip>
#include <istream>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "tmcmc/errors.hpp"
#include "tmcmc/problems.hpp"

namespace tmcmc {

std::vector<double> BodTarget::default_times() {
  std::vector<double> t(20);
  for (int i = 0; i < 20; ++i) t[static_cast<std::size_t>(i)] = 1.0 + 4.0 * i / 19.0;
  return t;
}

double BodTarget::model(double theta0, double theta1, double t) {
  return theta0 * (1.0 - std::exp(-theta1 * t));
}

BodTarget BodTarget::synthesize(std::uint64_t seed, double noise_variance) {
  if (!(noise_variance >= 0.0)) throw Error("noise variance must be non-negative");
  BodTarget b;
  b.times = default_times();
  b.noise_variance = noise_variance > 0.0 ? noise_variance : 2e-4;
  Rng rng(seed);
  std::normal_distribution<double> normal;
  const double sd = std::sqrt(noise_variance);
  for (double t : b.times) {
    b.data.push_back(model(kTrueParameters[0], kTrueParameters[1], t) + sd * normal(rng));
  }
  return b;
}

double BodTarget::log_density(const Eigen::VectorXd& theta) const {
  if (theta.size() != 2) throw DimensionError("BOD target is two-dimensional");
  double ss = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double res = model(theta[0], theta[1], times[i]) - data[i];
    ss += res * res;
  }
  return -0.5 * ss / noise_variance;
}

double BodTarget::log_density_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
  if (theta.size() != 2) throw DimensionError("BOD target is two-dimensional");
  grad = Eigen::VectorXd::Zero(2);
  double ss = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double e = std::exp(-theta[1] * times[i]);
    const double res = theta[0] * (1.0 - e) - data[i];
    ss += res * res;
    grad[0] -= res * (1.0 - e);
    grad[1] -= res * theta[0] * times[i] * e;
  }
  grad /= noise_variance;
  return -0.5 * ss / noise_variance;
}

Eigen::VectorXd BodTarget::mode() const {
  Eigen::VectorXd theta(2);
  theta << kTrueParameters[0], kTrueParameters[1];
  const auto n = static_cast<Eigen::Index>(times.size());
  auto sum_sq = [&](const Eigen::VectorXd& th) { return -2.0 * noise_variance * log_density(th); };
  double ss = sum_sq(theta);
  for (int it = 0; it < 100; ++it) {
    Eigen::MatrixXd jac(n, 2);
    Eigen::VectorXd res(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = times[static_cast<std::size_t>(i)];
      const double e = std::exp(-theta[1] * t);
      res[i] = theta[0] * (1.0 - e) - data[static_cast<std::size_t>(i)];
      jac(i, 0) = 1.0 - e;
      jac(i, 1) = theta[0] * t * e;
    }
    const Eigen::VectorXd step = -(jac.transpose() * jac).ldlt().solve(jac.transpose() * res);
    double alpha = 1.0;
    Eigen::VectorXd next = theta + step;
    double ss_next = sum_sq(next);
    while (ss_next > ss && alpha > 1e-10) {
      alpha *= 0.5;
      next = theta + alpha * step;
      ss_next = sum_sq(next);
    }
    if (ss_next > ss) break;
    const bool done = step.lpNorm<Eigen::Infinity>() * alpha <= 1e-14 * (1.0 + theta.lpNorm<Eigen::Infinity>());
    theta = next;
    ss = ss_next;
    if (done) break;
  }
  return theta;
}

TargetDensity BodTarget::target() const {
  if (times.size() != data.size() || times.empty()) throw Error("BOD data and times differ in length");
  if (!(noise_variance > 0.0)) throw Error("BOD noise variance must be positive");
  auto self = std::make_shared<const BodTarget>(*this);
  TargetDensity t;
  t.name = "bod";
  t.dimension = 2;
  t.log_density = [self](const Eigen::VectorXd& x) { return self->log_density(x); };
  t.log_density_gradient = [self](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    return self->log_density_gradient(x, g);
  };
  return t;
}

void BodTarget::write(std::ostream& out) const {
  out << "# time y\n" << std::setprecision(17);
  for (std::size_t i = 0; i < times.size(); ++i) out << times[i] << ' ' << data[i] << '\n';
}

BodTarget BodTarget::read(std::istream& in, double noise_variance) {
  BodTarget b;
  b.noise_variance = noise_variance;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    double t = 0.0, y = 0.0;
    if (!(row >> t >> y)) throw ParseError("line " + std::to_string(lineno) + ": expected 'time y'");
    b.times.push_back(t);
    b.data.push_back(y);
  }
  if (b.times.empty()) throw ParseError("BOD dataset is empty");
  return b;
}

}  // namespace tmcmc
