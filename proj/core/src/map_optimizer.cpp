#include "tmcmc/map_optimizer.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <vector>
#include <utility>
#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include "tmcmc/errors.hpp"

namespace tmcmc {

void OptimizerConfig::validate() const {
  if (!(k_r >= 0.0)) throw Error("k_R must be non-negative");
  if (!(lambda_min > 0.0)) throw Error("lambda_min must be positive");
  if (!(newton_tol > 0.0)) throw Error("newton_tol must be positive");
  if (max_newton_iters < 1) throw Error("max_newton_iters must be at least 1");
  if (!(contraction > 0.0 && contraction < 1.0)) throw Error("contraction must lie in (0, 1)");
  if (!(sufficient_decrease > 0.0 && sufficient_decrease < 0.5)) {
    throw Error("sufficient_decrease must lie in (0, 0.5)");
  }
  if (!(fraction_to_boundary > 0.0 && fraction_to_boundary < 1.0)) {
    throw Error("fraction_to_boundary must lie in (0, 1)");
  }
}

ComponentWorkspace::ComponentWorkspace(MultiIndexSet set, PolynomialFamily family)
    : set_(std::move(set)), family_(family), identity_(identity_coefficients(set_)) {
  gram_ = Eigen::MatrixXd::Zero(terms(), terms());
}

void ComponentWorkspace::append(const Eigen::Ref<const Eigen::MatrixXd>& samples) {
  if (samples.rows() == 0) return;
  if (samples.cols() != set_.dimension()) {
    throw DimensionError("samples have " + std::to_string(samples.cols()) +
                         " columns, expected " + std::to_string(set_.dimension()));
  }
  const int i = set_.component();
  const int active = i + 1;
  const int deg = set_.max_degree();
  const int stride = deg + 1;
  const Eigen::Index m = terms();
  const Eigen::Index add = samples.rows();

  f_.resize(static_cast<std::size_t>((rows_ + add) * m));
  g_.resize(f_.size());
  std::vector<double> vals(static_cast<std::size_t>(active * stride));
  std::vector<double> d1(static_cast<std::size_t>(stride));
  for (Eigen::Index r = 0; r < add; ++r) {
    for (int k = 0; k < active; ++k) {
      std::span<double> row(vals.data() + k * stride, static_cast<std::size_t>(stride));
      eval_univariate_table(family_, deg, samples(r, k), row,
                            k == i ? std::span<double>(d1) : std::span<double>{});
    }
    double* frow = f_.data() + (rows_ + r) * m;
    double* grow = g_.data() + (rows_ + r) * m;
    for (Eigen::Index t = 0; t < m; ++t) {
      const auto& j = set_[static_cast<std::size_t>(t)];
      double prefix = 1.0;
      for (int k = 0; k < i; ++k) prefix *= vals[static_cast<std::size_t>(k * stride + j[static_cast<std::size_t>(k)])];
      const int ji = j[static_cast<std::size_t>(i)];
      frow[t] = prefix * vals[static_cast<std::size_t>(i * stride + ji)];
      grow[t] = prefix * d1[static_cast<std::size_t>(ji)];
    }
  }
  Eigen::Map<const RowMatrix> fnew(f_.data() + rows_ * m, add, m);
  gram_.selfadjointView<Eigen::Lower>().rankUpdate(fnew.transpose());
  gram_.triangularView<Eigen::StrictlyUpper>() = gram_.transpose();
  rows_ += add;
}

Eigen::Map<const ComponentWorkspace::RowMatrix> ComponentWorkspace::F() const {
  return {f_.data(), rows_, terms()};
}

Eigen::Map<const ComponentWorkspace::RowMatrix> ComponentWorkspace::G() const {
  return {g_.data(), rows_, terms()};
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Entries of the multi-index with `power` in the diagonal slot, zero elsewhere.
std::vector<int> unit_entries(const MultiIndexSet& set, int power) {
  std::vector<int> e(static_cast<std::size_t>(set.dimension()), 0);
  e[static_cast<std::size_t>(set.component())] = power;
  return e;
}

}  // namespace

double objective(const ComponentWorkspace& ws, const Eigen::VectorXd& gamma,
                 const OptimizerConfig& cfg) {
  const Eigen::VectorXd dg = ws.G() * gamma;
  if (dg.size() > 0 && !(dg.minCoeff() > 0.0)) return kInf;
  const double quad = 0.5 * gamma.dot(ws.gram() * gamma);
  const double barrier = dg.array().log().sum();
  return quad - barrier + cfg.k_r * (gamma - ws.identity()).squaredNorm();
}

double objective_derivatives(const ComponentWorkspace& ws, const Eigen::VectorXd& gamma,
                             const OptimizerConfig& cfg, Eigen::VectorXd& grad,
                             Eigen::MatrixXd& hess) {
  const auto G = ws.G();
  const Eigen::VectorXd dg = G * gamma;
  if (dg.size() > 0 && !(dg.minCoeff() > 0.0)) return kInf;
  const Eigen::VectorXd inv = dg.cwiseInverse();
  const Eigen::VectorXd gram_gamma = ws.gram() * gamma;
  const Eigen::VectorXd delta = gamma - ws.identity();

  grad = gram_gamma - G.transpose() * inv + 2.0 * cfg.k_r * delta;

  hess = ws.gram();
  hess.diagonal().array() += 2.0 * cfg.k_r;
  if (G.rows() > 0) {
    const ComponentWorkspace::RowMatrix scaled = inv.asDiagonal() * G;
    hess.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
    hess.triangularView<Eigen::StrictlyUpper>() = hess.transpose();
  }
  return 0.5 * gamma.dot(gram_gamma) - dg.array().log().sum() + cfg.k_r * delta.squaredNorm();
}

namespace {

// Coefficients of (theta_i - mean) / sd over the appended samples, with
// 1/sd, or nothing when the set lacks the constant term or the column is
// degenerate.
std::optional<std::pair<Eigen::VectorXd, double>> standardized_start(const ComponentWorkspace& ws) {
  if (ws.rows() < 2) return std::nullopt;
  const MultiIndexSet& set = ws.index_set();
  const auto lin = set.find(MultiIndex(unit_entries(set, 1)));
  const auto con = set.find(MultiIndex(unit_entries(set, 0)));
  if (lin < 0 || con < 0) return std::nullopt;
  const auto& gram = ws.gram();
  const double k = static_cast<double>(ws.rows());
  const double mean = gram(con, lin) / k;
  const double var = gram(lin, lin) / k - mean * mean;
  if (!(var > 0.0) || !std::isfinite(var)) return std::nullopt;
  const double slope = 1.0 / std::sqrt(var);
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(ws.terms());
  gamma[lin] = slope;
  gamma[con] = -mean * slope;
  return std::make_pair(std::move(gamma), slope);
}

}  // namespace

ComponentSolution solve_component(const ComponentWorkspace& ws, const OptimizerConfig& cfg,
                                  const std::optional<Eigen::VectorXd>& warm_start) {
  cfg.validate();
  const Eigen::Index m = ws.terms();
  const auto G = ws.G();
  const double scale = std::max<double>(1.0, static_cast<double>(ws.rows()));

  ComponentSolution sol;
  // The affine map (theta_i - mean) / sd has constant derivative 1/sd. It is
  // the cold start when it beats the identity, and the anchor that restores
  // feasibility of a warm start.
  Eigen::VectorXd anchor = ws.identity();
  double anchor_slope = 1.0;
  if (const auto standardized = standardized_start(ws)) {
    anchor_slope = standardized->second;
    anchor = standardized->first;
    if (!warm_start && objective(ws, ws.identity(), cfg) <= objective(ws, anchor, cfg)) {
      anchor = ws.identity();
      anchor_slope = 1.0;
    }
  }
  Eigen::VectorXd gamma = anchor;
  if (warm_start) {
    if (warm_start->size() != m) throw DimensionError("warm start has the wrong length");
    gamma = *warm_start;
    sol.warm_started = true;
    if (ws.rows() > 0) {
      // G anchor = anchor_slope, so a convex blend restores a strictly feasible start.
      // Only starts at or near the boundary are moved; they are pulled to a
      // tenth of the anchor's slope.
      const double lowest = (G * gamma).minCoeff();
      const double floor = 0.1 * anchor_slope;
      if (lowest < 1e-3 * anchor_slope) {
        const double t = (floor - lowest) / (anchor_slope - lowest);
        gamma = (1.0 - t) * gamma + t * anchor;
      }
    }
  }

  Eigen::VectorXd grad(m);
  Eigen::MatrixXd hess(m, m);
  double f = objective_derivatives(ws, gamma, cfg, grad, hess);
  if (!std::isfinite(f)) throw ConvergenceError("start point is infeasible", kInf);
  sol.objective_history.push_back(f);

  for (int it = 0;; ++it) {
    const double gnorm = grad.lpNorm<Eigen::Infinity>();
    if (gnorm <= cfg.newton_tol * scale) {
      sol.coefficients = gamma;
      sol.iterations = it;
      sol.objective = f;
      sol.gradient_norm = gnorm;
      return sol;
    }
    if (it >= cfg.max_newton_iters) {
      throw ConvergenceError("Newton solve hit the iteration limit (gradient norm " +
                                 std::to_string(gnorm) + ")",
                             gnorm);
    }

    Eigen::LLT<Eigen::MatrixXd> llt(hess);
    if (llt.info() != Eigen::Success) {
      throw ConvergenceError("Hessian factorization failed", gnorm);
    }
    const Eigen::VectorXd step = -llt.solve(grad);
    const double slope = grad.dot(step);
    if (!(slope < 0.0)) throw ConvergenceError("Newton step is not a descent direction", gnorm);

    // Largest step keeping every row of G gamma at or above lambda_min.
    double alpha = 1.0;
    if (ws.rows() > 0) {
      const Eigen::VectorXd dg = G * gamma;
      const Eigen::VectorXd dstep = G * step;
      for (Eigen::Index k = 0; k < dg.size(); ++k) {
        if (dstep[k] < 0.0) {
          alpha = std::min(alpha, cfg.fraction_to_boundary * (dg[k] - cfg.lambda_min) / -dstep[k]);
        }
      }
    }

    double f_new = kInf;
    Eigen::VectorXd trial;
    bool accepted = false;
    while (alpha > 1e-14) {
      trial = gamma + alpha * step;
      f_new = objective(ws, trial, cfg);
      if (f_new <= f + cfg.sufficient_decrease * alpha * slope && f_new < f) {
        accepted = true;
        break;
      }
      alpha *= cfg.contraction;
    }
    if (!accepted) {
      // No representable decrease left: the Newton decrement is at roundoff.
      if (-slope <= 1e-10 * (1.0 + std::abs(f))) {
        sol.coefficients = gamma;
        sol.iterations = it;
        sol.objective = f;
        sol.gradient_norm = gnorm;
        return sol;
      }
      throw ConvergenceError("line search failed to decrease the objective", gnorm);
    }
    gamma = trial;
    f = objective_derivatives(ws, gamma, cfg, grad, hess);
    sol.objective_history.push_back(f);
    spdlog::trace("newton {}: f={:.17g} |g|={:.3g} alpha={:.3g} decrement={:.3g}", it, f, gnorm, alpha, -slope);
  }
}

double FitResult::total_objective() const {
  double total = 0.0;
  for (const auto& c : components) total += c.objective;
  return total;
}

MapFitter::MapFitter(std::vector<MultiIndexSet> sets, PolynomialFamily family, OptimizerConfig cfg,
                     double radius)
    : family_(family), cfg_(cfg), radius_(radius) {
  cfg_.validate();
  if (sets.empty()) throw DimensionError("at least one index set is required");
  const int n = static_cast<int>(sets.size());
  workspaces_.reserve(sets.size());
  for (int i = 0; i < n; ++i) {
    auto& s = sets[static_cast<std::size_t>(i)];
    if (s.component() != i || s.dimension() != n) {
      throw DimensionError("index set " + std::to_string(i) + " does not match its position");
    }
    workspaces_.emplace_back(std::move(s), family);
  }
}

void MapFitter::append(const Eigen::Ref<const Eigen::MatrixXd>& samples) {
  if (samples.rows() > 0 && samples.cols() != dimension()) {
    throw DimensionError("sample matrix has the wrong number of columns");
  }
  for (auto& ws : workspaces_) ws.append(samples);
}

Eigen::Index MapFitter::sample_count() const noexcept { return workspaces_.front().rows(); }

ComponentSolution MapFitter::fit_component(int i, const TriangularMap* previous) const {
  const auto& ws = workspaces_.at(static_cast<std::size_t>(i));
  std::optional<Eigen::VectorXd> warm;
  if (previous) {
    const auto& pc = previous->component(i);
    if (pc.index_set() != ws.index_set()) {
      throw FitError(i, "previous map uses a different index set");
    }
    warm = pc.coefficients();
  }
  try {
    ComponentSolution sol = solve_component(ws, cfg_, warm);
    if (ws.rows() > 0) {
      const double lowest = (ws.G() * sol.coefficients).minCoeff();
      if (!(lowest >= cfg_.lambda_min)) {
        throw FitError(i, "fitted component is not increasing at every sample");
      }
    }
    return sol;
  } catch (const FitError&) {
    throw;
  } catch (const Error& e) {
    throw FitError(i, e.what());
  }
}

FitResult MapFitter::fit(const TriangularMap* previous, bool parallel) const {
  const int n = dimension();
  if (previous && previous->dimension() != n) {
    throw DimensionError("previous map has a different dimension");
  }
  std::vector<ComponentSolution> sols(static_cast<std::size_t>(n));
  if (parallel && n > 1) {
    std::vector<std::future<ComponentSolution>> jobs;
    jobs.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      jobs.push_back(std::async(std::launch::async, [this, i, previous] {
        return fit_component(i, previous);
      }));
    }
    // Collect every job before rethrowing so no task outlives the fitter.
    std::exception_ptr first_error;
    for (int i = 0; i < n; ++i) {
      try {
        sols[static_cast<std::size_t>(i)] = jobs[static_cast<std::size_t>(i)].get();
      } catch (...) {
        if (!first_error) first_error = std::current_exception();
      }
    }
    if (first_error) std::rethrow_exception(first_error);
  } else {
    for (int i = 0; i < n; ++i) sols[static_cast<std::size_t>(i)] = fit_component(i, previous);
  }

  std::vector<MapComponent> comps;
  comps.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    comps.emplace_back(workspaces_[static_cast<std::size_t>(i)].index_set(),
                       sols[static_cast<std::size_t>(i)].coefficients, family_);
  }
  return FitResult{TriangularMap(std::move(comps), cfg_.lambda_min, radius_), std::move(sols)};
}

FitResult fit_map(const Eigen::Ref<const Eigen::MatrixXd>& samples,
                  const std::vector<MultiIndexSet>& sets, PolynomialFamily family,
                  const OptimizerConfig& cfg, const TriangularMap* previous) {
  if (samples.rows() == 0) throw Error("fit_map needs at least one sample");
  MapFitter fitter(sets, family, cfg, previous ? previous->radius() : TriangularMap::kUnbounded);
  fitter.append(samples);
  return fitter.fit(previous);
}

}  // namespace tmcmc
