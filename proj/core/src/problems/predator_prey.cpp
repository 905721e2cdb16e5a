#include <atomic>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>

#include <spdlog/spdlog.h>

#include "tmcmc/errors.hpp"
#include "tmcmc/problems.hpp"

namespace tmcmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Relative slack on the trace test; absorbs rounding at the Hopf boundary.
constexpr double kTraceTolerance = 1e-10;

}  // namespace

std::array<double, 2> predprey_rhs(double p, double q, const PredPreyParams& c) {
  const double r = c[2], k = c[3], s = c[4], a = c[5], u = c[6], v = c[7];
  const double sat = p * q / (a + p);
  return {r * p * (1.0 - p / k) - s * sat, u * sat - v * q};
}

std::optional<std::array<double, 2>> predprey_fixed_point(const PredPreyParams& c) {
  const double r = c[2], k = c[3], s = c[4], a = c[5], u = c[6], v = c[7];
  if (!(u > v)) return std::nullopt;
  const double pf = a * v / (u - v);
  const double qf = r * (1.0 - pf / k) * (a + pf) / s;
  return std::array<double, 2>{pf, qf};
}

std::array<double, 4> predprey_jacobian(double p, double q, const PredPreyParams& c) {
  const double r = c[2], k = c[3], s = c[4], a = c[5], u = c[6], v = c[7];
  const double d = (a + p) * (a + p);
  return {r * (1.0 - 2.0 * p / k) - s * q * a / d, -s * p / (a + p), u * q * a / d, u * p / (a + p) - v};
}

bool predprey_is_cyclic(const PredPreyParams& c) {
  const auto fp = predprey_fixed_point(c);
  if (!fp) return false;
  const auto [pf, qf] = *fp;
  if (!(pf > 0.0 && qf > 0.0)) return false;
  const auto j = predprey_jacobian(pf, qf, c);
  const double trace = j[0] + j[3];
  const double det = j[0] * j[3] - j[1] * j[2];
  if (!(det > 0.0)) return false;
  // With det > 0 both eigenvalues share the sign of the trace in their real part.
  const double logistic = c[2] * (1.0 - 2.0 * pf / c[3]);
  const double magnitude = std::abs(logistic) + std::abs(j[0] - logistic) + std::abs(j[3] + c[7]) + c[7];
  return trace >= -kTraceTolerance * std::max(magnitude, std::numeric_limits<double>::min());
}

std::vector<double> PredatorPreyTarget::default_times() { return {0.0, 12.5, 25.0, 37.5, 50.0}; }

PredPreyParams PredatorPreyTarget::parameters(const Eigen::VectorXd& theta) {
  if (theta.size() != 8) throw DimensionError("predator-prey target is eight-dimensional");
  PredPreyParams p{};
  for (std::size_t i = 0; i < 8; ++i) p[i] = theta[static_cast<Eigen::Index>(i)] * kPredPreyTrue[i];
  return p;
}

std::optional<std::vector<std::array<double, 2>>> PredatorPreyTarget::solve(const PredPreyParams& c) const {
  const OdeRhs rhs = [&c](const std::vector<double>& y, std::vector<double>& dydt, double) {
    const auto d = predprey_rhs(y[0], y[1], c);
    dydt[0] = d[0];
    dydt[1] = d[1];
  };
  const auto sol = integrate_at(rhs, {c[0], c[1]}, times, ode);
  if (!sol) return std::nullopt;
  std::vector<std::array<double, 2>> out;
  out.reserve(sol->size());
  for (const auto& y : *sol) out.push_back({y[0], y[1]});
  return out;
}

PredatorPreyTarget PredatorPreyTarget::synthesize(std::uint64_t seed, double noise_variance) {
  if (!(noise_variance >= 0.0)) throw Error("noise variance must be non-negative");
  PredatorPreyTarget t;
  t.times = default_times();
  if (noise_variance > 0.0) t.noise_variance = noise_variance;
  const auto clean = t.solve(kPredPreyTrue);
  if (!clean) throw Error("integration at the nominal parameters failed");
  Rng rng(seed);
  std::normal_distribution<double> normal;
  const double sd = std::sqrt(noise_variance);
  for (const auto& y : *clean) t.data.push_back({y[0] + sd * normal(rng), y[1] + sd * normal(rng)});
  return t;
}

double PredatorPreyTarget::log_density(const Eigen::VectorXd& theta) const {
  if (theta.size() != 8) throw DimensionError("predator-prey target is eight-dimensional");
  for (Eigen::Index i = 0; i < 8; ++i) {
    if (!(theta[i] >= kLower && theta[i] <= kUpper)) return kNegInf;
  }
  const PredPreyParams c = parameters(theta);
  if (!predprey_is_cyclic(c)) return kNegInf;
  const auto sol = solve(c);
  if (!sol) {
    static std::atomic<int> warned{0};
    if (warned.fetch_add(1) < 10) spdlog::warn("predator-prey integration failed; treating density as zero");
    return kNegInf;
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      const double res = (*sol)[i][j] - data[i][j];
      ss += res * res;
    }
  }
  return -0.5 * ss / noise_variance;
}

TargetDensity PredatorPreyTarget::target() const {
  if (times.size() != data.size() || times.empty()) throw Error("predator-prey data and times differ in length");
  if (!(noise_variance > 0.0)) throw Error("predator-prey noise variance must be positive");
  auto self = std::make_shared<const PredatorPreyTarget>(*this);
  TargetDensity t;
  t.name = "predator-prey";
  t.dimension = 8;
  t.log_density = [self](const Eigen::VectorXd& x) { return self->log_density(x); };
  return t;
}

void PredatorPreyTarget::write(std::ostream& out) const {
  out << "# time P Q\n" << std::setprecision(17);
  for (std::size_t i = 0; i < times.size(); ++i) {
    out << times[i] << ' ' << data[i][0] << ' ' << data[i][1] << '\n';
  }
}

PredatorPreyTarget PredatorPreyTarget::read(std::istream& in, double noise_variance) {
  PredatorPreyTarget t;
  t.noise_variance = noise_variance;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    double time = 0.0, p = 0.0, q = 0.0;
    if (!(row >> time >> p >> q)) throw ParseError("line " + std::to_string(lineno) + ": expected 'time P Q'");
    t.times.push_back(time);
    t.data.push_back({p, q});
  }
  if (t.times.empty()) throw ParseError("predator-prey dataset is empty");
  return t;
}

}  // namespace tmcmc
