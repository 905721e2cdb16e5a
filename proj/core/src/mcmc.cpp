#include <algorithm>
#include "tmcmc/mcmc.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include <spdlog/spdlog.h>

#include "tmcmc/errors.hpp"

namespace tmcmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();

double sanitize(double lp) { return std::isnan(lp) ? kNegInf : lp; }

struct Candidate {
  Eigen::VectorXd r, theta, target_grad, r_grad;
  double log_target = kNegInf;
  double reduced = kNegInf;
};

// Maps r back to target space and evaluates it. Returns false when the
// preimage cannot be computed; the candidate then has zero density. Failed
// candidates are still charged one evaluation.
bool evaluate_candidate(Candidate& c, const TriangularMap& map, const TargetDensity& target,
                        const Eigen::VectorXd& current, bool with_gradient, int& evaluations) {
  ++evaluations;
  try {
    c.theta = map.inverse(c.r, &current);
  } catch (const Error& e) {
    spdlog::debug("proposal rejected: {}", e.what());
    return false;
  }
  if (with_gradient) {
    c.target_grad.resize(c.theta.size());
    c.log_target = sanitize(target.log_density_gradient(c.theta, c.target_grad));
  } else {
    c.log_target = sanitize(target.log_density(c.theta));
  }
  if (!(c.log_target > kNegInf) || !std::isfinite(c.log_target)) {
    c.log_target = kNegInf;
    return true;
  }
  try {
    c.reduced = c.log_target - map.log_det_jacobian(c.theta);
    if (with_gradient) c.r_grad = pushforward_gradient_at(map, c.theta, c.target_grad);
  } catch (const Error& e) {
    spdlog::debug("proposal rejected: {}", e.what());
    c.reduced = kNegInf;
    return false;
  }
  return true;
}

void adopt(ChainState& state, Candidate& c) {
  state.theta = std::move(c.theta);
  state.log_target = c.log_target;
  state.target_grad = std::move(c.target_grad);
  state.r = std::move(c.r);
  state.reduced = c.reduced;
  state.r_grad = std::move(c.r_grad);
}

// Rows of the most recent `window` distinct states among rows [0, end).
std::vector<Eigen::Index> recent_distinct(const std::vector<std::uint8_t>& accepted, long end,
                                          long window) {
  std::vector<Eigen::Index> rows;
  for (long k = end - 1; k >= 0 && static_cast<long>(rows.size()) < window; --k) {
    if (k == 0 || accepted[static_cast<std::size_t>(k)] != 0) rows.push_back(k);
  }
  return rows;
}

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) throw Error("sigma2_M needs at least two samples");
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

long ChainConfig::first_adaptation() const noexcept {
  return adapt_start >= 0 ? adapt_start : std::max(adapt_interval, 500L);
}

void ChainConfig::validate() const {
  if (steps < 1) throw Error("chain length must be positive");
  if (adapt_interval < 1) throw Error("adaptation interval must be positive");
  if (burn_in < 0 || burn_in >= steps) throw Error("burn-in must lie in [0, steps)");
  if (tune_interval < 1) throw Error("tune interval must be positive");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) {
    throw Error("target acceptance must lie in (0, 1)");
  }
  if (sigma2_window < 2) throw Error("sigma2 window must be at least 2");
  if (!(radius > 0.0)) throw Error("extension radius must be positive");
  tmcmc::validate(proposal);
  optimizer.validate();
}

long ChainResult::total_evaluations() const {
  long total = 0;
  for (auto e : evaluations) total += e;
  return total;
}

double ChainResult::acceptance_rate(long from, long to) const {
  if (to < 0) to = steps();
  from = std::clamp(from, 0L, steps());
  to = std::clamp(to, from, steps());
  if (to == from) return 0.0;
  long acc = 0;
  for (long k = from; k < to; ++k) acc += accepted_stage[static_cast<std::size_t>(k)] != 0;
  return static_cast<double>(acc) / static_cast<double>(to - from);
}

std::vector<double> ChainResult::sigma2_history() const {
  std::vector<double> out;
  for (const auto& a : adaptations) {
    if (a.applied) out.push_back(a.sigma2_after);
  }
  return out;
}

ChainState ChainState::start(const TargetDensity& target, const TriangularMap& map,
                             const Eigen::VectorXd& theta, bool with_gradient) {
  if (theta.size() != target.dimension) throw DimensionError("start point has the wrong dimension");
  ChainState s;
  s.theta = theta;
  if (with_gradient) {
    if (!target.has_gradient()) throw Error("target '" + target.name + "' supplies no gradient");
    s.target_grad.resize(theta.size());
    s.log_target = target.log_density_gradient(theta, s.target_grad);
  } else {
    s.log_target = target.log_density(theta);
  }
  if (!std::isfinite(s.log_target)) throw Error("target density is zero or undefined at the start point");
  s.remap(map);
  return s;
}

void ChainState::remap(const TriangularMap& map) {
  double log_det = 0.0;
  r = map.forward_with_log_det(theta, log_det);
  reduced = log_target - log_det;
  if (target_grad.size() > 0) r_grad = pushforward_gradient_at(map, theta, target_grad);
}

StepOutcome mh_step(ChainState& state, const TriangularMap& map,
                    const std::vector<StageKernel>& stages, const TargetDensity& target, Rng& rng) {
  if (stages.empty() || stages.size() > 2) throw Error("a step needs one or two stages");
  std::uniform_real_distribution<double> unif;
  const bool with_gradient = state.target_grad.size() > 0;
  const Eigen::VectorXd* gx = with_gradient ? &state.r_grad : nullptr;
  StepOutcome out;

  const StageKernel& q1 = stages[0];
  Candidate y1;
  y1.r = q1.sample(state.r, rng, gx);
  out.stages_tried = 1;
  if (!evaluate_candidate(y1, map, target, state.theta, with_gradient, out.evaluations)) ++out.failures;
  const double u1 = unif(rng);
  double log_a1 = kNegInf;
  if (y1.reduced > kNegInf) {
    const Eigen::VectorXd* g1 = with_gradient ? &y1.r_grad : nullptr;
    log_a1 = std::min(0.0, y1.reduced - state.reduced + q1.log_density(state.r, y1.r, g1) -
                               q1.log_density(y1.r, state.r, gx));
    if (std::isnan(log_a1)) log_a1 = kNegInf;
  }
  if (std::log(u1) < log_a1) {
    adopt(state, y1);
    out.accepted_stage = 1;
    return out;
  }
  if (stages.size() == 1) return out;

  const StageKernel& q2 = stages[1];
  Candidate y2;
  y2.r = q2.sample(state.r, rng, gx);
  out.stages_tried = 2;
  if (!evaluate_candidate(y2, map, target, state.theta, with_gradient, out.evaluations)) ++out.failures;
  const double u2 = unif(rng);
  const double a2 =
      dr_two_stage_accept_reference(q1, q2, state.r, state.reduced, y1.r, y1.reduced, y2.r, y2.reduced);
  if (u2 < a2) {
    adopt(state, y2);
    out.accepted_stage = 2;
  }
  return out;
}

StepOutcome mh_step(ChainState& state, const TriangularMap& map, const ReferenceProposal& prop,
                    const TargetDensity& target, Rng& rng, double sigma2_m, double scale_factor) {
  return mh_step(state, map, stage_kernels(prop, sigma2_m, scale_factor), target, rng);
}

double estimate_sigma2_m(const TriangularMap& map, const Eigen::MatrixXd& samples,
                         const Eigen::VectorXd& log_target) {
  if (samples.rows() != log_target.size()) throw DimensionError("one log-density per sample row is required");
  std::vector<double> q;
  q.reserve(static_cast<std::size_t>(samples.rows()));
  for (Eigen::Index k = 0; k < samples.rows(); ++k) {
    const Eigen::VectorXd theta = samples.row(k).transpose();
    q.push_back(log_target[k] - map.pullback_log_density(theta));
  }
  return sample_variance(q);
}

double estimate_sigma2_m(const TargetDensity& target, const TriangularMap& map,
                         const Eigen::MatrixXd& samples) {
  Eigen::VectorXd lp(samples.rows());
  for (Eigen::Index k = 0; k < samples.rows(); ++k) lp[k] = target.log_density(samples.row(k).transpose());
  return estimate_sigma2_m(map, samples, lp);
}

ChainResult run_adaptive(const ChainConfig& cfg, const TargetDensity& target,
                         const Eigen::VectorXd& theta0) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();
  const int n = target.dimension;
  if (theta0.size() != n) throw DimensionError("start point has the wrong dimension");
  const bool with_gradient = needs_gradient(cfg.proposal);

  const auto sets = cfg.basis.build(n);
  MapPtr map = std::make_shared<const TriangularMap>(
      identity_map(sets, cfg.basis.family, cfg.optimizer.lambda_min, cfg.radius));
  MapFitter fitter(sets, cfg.basis.family, cfg.optimizer, cfg.radius);

  ChainResult res;
  res.method = std::string("tm+") + std::string(proposal_name(cfg.proposal));
  res.seed = cfg.seed;
  res.burn_in = cfg.burn_in;
  res.samples.resize(cfg.steps, n);
  res.accepted_stage.assign(static_cast<std::size_t>(cfg.steps), 0);
  res.evaluations.assign(static_cast<std::size_t>(cfg.steps), 0);
  res.maps.push_back({0, map});
  Eigen::VectorXd log_targets(cfg.steps);

  Rng rng(cfg.seed);
  ChainState state = ChainState::start(target, *map, theta0, with_gradient);
  double sigma2 = kInf;
  double scale = 1.0;
  std::vector<StageKernel> stages = stage_kernels(cfg.proposal, sigma2, scale);
  std::size_t tuned_stage = 0;
  while (tuned_stage < stages.size() && !stages[tuned_stage].tunable()) ++tuned_stage;
  long batch_attempts = 0, batch_accepts = 0;
  long appended = 0;

  auto window_rows = [&](long end) {
    const auto rows = recent_distinct(res.accepted_stage, end, cfg.sigma2_window);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), n);
    Eigen::VectorXd lp(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) {
      x.row(static_cast<Eigen::Index>(j)) = res.samples.row(rows[j]);
      lp[static_cast<Eigen::Index>(j)] = log_targets[rows[j]];
    }
    return std::pair{x, lp};
  };

  auto adapt = [&](long k) {
    AdaptationRecord rec;
    rec.step = k;
    const auto t0 = std::chrono::steady_clock::now();
    fitter.append(res.samples.middleRows(appended, k - appended));
    appended = k;
    const auto [wx, wlp] = window_rows(k);
    try {
      rec.sigma2_before = wx.rows() >= 2 ? estimate_sigma2_m(*map, wx, wlp) : kInf;
      FitResult fit = fitter.fit(map.get(), cfg.parallel_fit);
      for (const auto& c : fit.components) rec.newton_iterations.push_back(c.iterations);
      auto next = std::make_shared<const TriangularMap>(std::move(fit.map));
      ChainState moved = state;
      moved.remap(*next);
      rec.sigma2_after = wx.rows() >= 2 ? estimate_sigma2_m(*next, wx, wlp) : kInf;
      state = std::move(moved);
      map = std::move(next);
      sigma2 = rec.sigma2_after;
      rec.applied = true;
      res.maps.push_back({k, map});
    } catch (const Error& e) {
      rec.error = e.what();
      spdlog::warn("adaptation at step {} failed, keeping the previous map: {}", k, e.what());
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.adaptations.push_back(std::move(rec));
    stages = stage_kernels(cfg.proposal, sigma2, scale);
  };

  const long first = cfg.first_adaptation();
  for (long k = 0; k < cfg.steps; ++k) {
    if (cfg.adapt && k > 0 && k >= first && k % cfg.adapt_interval == 0) adapt(k);

    const StepOutcome out = mh_step(state, *map, stages, target, rng);
    const auto idx = static_cast<std::size_t>(k);
    res.accepted_stage[idx] = static_cast<std::uint8_t>(out.accepted_stage);
    res.evaluations[idx] = static_cast<std::uint8_t>(out.evaluations);
    res.proposal_failures += out.failures;
    for (int s = 0; s < out.stages_tried; ++s) ++res.stage_attempts[static_cast<std::size_t>(s)];
    if (out.accepted_stage > 0) ++res.stage_accepts[static_cast<std::size_t>(out.accepted_stage - 1)];
    res.samples.row(k) = state.theta.transpose();
    log_targets[k] = state.log_target;

    if (cfg.tune && k < cfg.burn_in && tuned_stage < stages.size()) {
      if (out.stages_tried > static_cast<int>(tuned_stage)) {
        ++batch_attempts;
        batch_accepts += out.accepted_stage == static_cast<int>(tuned_stage) + 1;
      }
      if (batch_attempts >= cfg.tune_interval) {
        const double rate = static_cast<double>(batch_accepts) / static_cast<double>(batch_attempts);
        // Bounded so a run of failed proposals cannot collapse the kernel.
        scale = std::clamp(scale * std::exp(2.0 * (rate - cfg.target_acceptance)), 1e-3, 1e3);
        stages = stage_kernels(cfg.proposal, sigma2, scale);
        batch_attempts = batch_accepts = 0;
      }
    }
  }

  if (res.proposal_failures > 0) {
    spdlog::info("{} proposals could not be mapped back and were rejected", res.proposal_failures);
  }
  res.scale_factor = scale;
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return res;
}

}  // namespace tmcmc
