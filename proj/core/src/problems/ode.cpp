#include <cmath>

#include <boost/numeric/odeint.hpp>
#include <spdlog/spdlog.h>

#include "tmcmc/errors.hpp"
#include "tmcmc/problems.hpp"

namespace tmcmc {

std::optional<std::vector<std::vector<double>>> integrate_at(const OdeRhs& rhs, std::vector<double> y0,
                                                             std::span<const double> times,
                                                             const OdeOptions& opts) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<double>;
  if (times.empty()) return std::vector<std::vector<double>>{};
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw Error("output times must be strictly increasing");
  }
  std::vector<std::vector<double>> out;
  out.reserve(times.size());
  bool finite = true;
  auto observer = [&](const State& y, double) {
    for (double v : y) finite = finite && std::isfinite(v);
    out.push_back(y);
  };
  auto system = [&](const State& y, State& dydt, double t) {
    dydt.resize(y.size());
    rhs(y, dydt, t);
  };
  try {
    auto stepper = odeint::make_controlled(opts.abs_tol, opts.rel_tol, odeint::runge_kutta_dopri5<State>());
    odeint::integrate_times(stepper, system, y0, times.begin(), times.end(), opts.initial_step, observer,
                            odeint::max_step_checker(static_cast<int>(opts.max_steps)));
  } catch (const std::exception& e) {
    spdlog::debug("ODE integration failed: {}", e.what());
    return std::nullopt;
  }
  if (!finite || out.size() != times.size()) return std::nullopt;
  return out;
}

}  // namespace tmcmc
