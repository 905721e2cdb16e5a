#include "tmcmc/proposals.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "tmcmc/errors.hpp"

namespace tmcmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double gaussian_log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, double scale) {
  const double n = static_cast<double>(x.size());
  return -0.5 * n * std::log(2.0 * std::numbers::pi) - n * std::log(scale) -
         0.5 * (x - mean).squaredNorm() / (scale * scale);
}

Eigen::VectorXd standard_normal(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(n);
  for (Eigen::Index k = 0; k < n; ++k) z[k] = normal(rng);
  return z;
}

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// log(1 - exp(l)) for l <= 0.
double log1m_exp(double l) { return l == kNegInf ? 0.0 : std::log(-std::expm1(l)); }

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw Error(std::string(what) + " must be positive and finite");
}

const Eigen::VectorXd& require_gradient(const Eigen::VectorXd* grad) {
  if (!grad) throw Error("Langevin proposal requires the reference gradient");
  return *grad;
}

}  // namespace

void validate(const ReferenceProposal& prop) {
  std::visit(Overloaded{
                 [](const RandomWalk& p) { require_positive(p.sigma, "random-walk sigma"); },
                 [](const Mala& p) { require_positive(p.step, "MALA step"); },
                 [](const DelayedRejectionGlobal& p) { require_positive(p.sigma2, "DR sigma2"); },
                 [](const DelayedRejectionLocal& p) {
                   require_positive(p.sigma1, "DR sigma1");
                   require_positive(p.sigma2, "DR sigma2");
                   if (!(p.sigma1 > p.sigma2)) throw Error("local DR requires sigma1 > sigma2");
                 },
                 [](const Mixture& p) {
                   require_positive(p.sigma, "mixture sigma");
                   if (!(p.w_max >= 0.0 && p.w_max < 1.0)) throw Error("w_max must lie in [0, 1)");
                   if (!(p.w_scale >= 0.0) || !std::isfinite(p.w_scale)) {
                     throw Error("w_scale must be non-negative");
                   }
                 },
             },
             prop);
}

std::string_view proposal_name(const ReferenceProposal& prop) {
  return std::visit(Overloaded{
                        [](const RandomWalk&) { return std::string_view("rw"); },
                        [](const Mala&) { return std::string_view("mala"); },
                        [](const DelayedRejectionGlobal&) { return std::string_view("drg"); },
                        [](const DelayedRejectionLocal&) { return std::string_view("drl"); },
                        [](const Mixture&) { return std::string_view("mix"); },
                    },
                    prop);
}

bool needs_gradient(const ReferenceProposal& prop) { return std::holds_alternative<Mala>(prop); }

int stage_count(const ReferenceProposal& prop) {
  return std::holds_alternative<DelayedRejectionGlobal>(prop) ||
                 std::holds_alternative<DelayedRejectionLocal>(prop)
             ? 2
             : 1;
}

double mixture_weight(const Mixture& mix, double sigma2_m) {
  if (mix.w_scale == 0.0) return mix.w_max;
  if (std::isinf(sigma2_m)) return 0.0;
  return mix.w_max / (1.0 + mix.w_scale * sigma2_m);
}

double StageKernel::log_density(const Eigen::VectorXd& to, const Eigen::VectorXd& from,
                                const Eigen::VectorXd* grad_from) const {
  switch (kind) {
    case Kind::kIndependence:
      return standard_normal_log_density(to);
    case Kind::kWalk:
      return gaussian_log_density(to, from, scale);
    case Kind::kLangevin: {
      const auto& g = require_gradient(grad_from);
      return gaussian_log_density(to, from + 0.5 * scale * scale * g, scale);
    }
    case Kind::kMixture: {
      const double walk = weight < 1.0 ? std::log1p(-weight) + gaussian_log_density(to, from, scale)
                                       : kNegInf;
      const double indep = weight > 0.0 ? std::log(weight) + standard_normal_log_density(to) : kNegInf;
      return log_sum_exp(walk, indep);
    }
  }
  return kNegInf;
}

Eigen::VectorXd StageKernel::sample(const Eigen::VectorXd& from, Rng& rng,
                                    const Eigen::VectorXd* grad_from) const {
  switch (kind) {
    case Kind::kIndependence:
      return standard_normal(from.size(), rng);
    case Kind::kWalk:
      return from + scale * standard_normal(from.size(), rng);
    case Kind::kLangevin: {
      const auto& g = require_gradient(grad_from);
      return from + 0.5 * scale * scale * g + scale * standard_normal(from.size(), rng);
    }
    case Kind::kMixture: {
      std::uniform_real_distribution<double> unif;
      const bool independent = unif(rng) < weight;
      const Eigen::VectorXd z = standard_normal(from.size(), rng);
      return independent ? z : Eigen::VectorXd(from + scale * z);
    }
  }
  return from;
}

std::vector<StageKernel> stage_kernels(const ReferenceProposal& prop, double sigma2_m,
                                       double scale_factor) {
  using K = StageKernel::Kind;
  return std::visit(
      Overloaded{
          [&](const RandomWalk& p) {
            return std::vector<StageKernel>{{K::kWalk, p.sigma * scale_factor, 0.0}};
          },
          [&](const Mala& p) {
            return std::vector<StageKernel>{{K::kLangevin, p.step * scale_factor, 0.0}};
          },
          [&](const DelayedRejectionGlobal& p) {
            return std::vector<StageKernel>{{K::kIndependence, 1.0, 1.0},
                                            {K::kWalk, p.sigma2 * scale_factor, 0.0}};
          },
          [&](const DelayedRejectionLocal& p) {
            return std::vector<StageKernel>{{K::kWalk, p.sigma1 * scale_factor, 0.0},
                                            {K::kWalk, p.sigma2 * scale_factor, 0.0}};
          },
          [&](const Mixture& p) {
            return std::vector<StageKernel>{
                {K::kMixture, p.sigma * scale_factor, mixture_weight(p, sigma2_m)}};
          },
      },
      prop);
}

double reference_log_density(const ReferenceProposal& prop, const Eigen::VectorXd& r_new,
                             const Eigen::VectorXd& r, double sigma2_m,
                             const Eigen::VectorXd* grad_r) {
  if (r_new.size() != r.size()) throw DimensionError("proposal points differ in dimension");
  return stage_kernels(prop, sigma2_m).front().log_density(r_new, r, grad_r);
}

ProposalOutcome propose(const ReferenceProposal& prop, const Eigen::VectorXd& r, Rng& rng,
                        double sigma2_m, const Eigen::VectorXd* grad_r) {
  const StageKernel q = stage_kernels(prop, sigma2_m).front();
  ProposalOutcome out;
  out.point = q.sample(r, rng, grad_r);
  out.stage = 1;
  out.log_forward = q.log_density(out.point, r, grad_r);
  out.log_reverse = q.kind == StageKernel::Kind::kLangevin
                        ? std::numeric_limits<double>::quiet_NaN()
                        : q.log_density(r, out.point, nullptr);
  return out;
}

namespace {

Eigen::VectorXd reference_gradient(const TriangularMap& map, const TargetDensity* target,
                                   const Eigen::VectorXd& theta) {
  if (!target || !target->has_gradient()) throw Error("MALA requires a target gradient");
  Eigen::VectorXd g(theta.size());
  target->log_density_gradient(theta, g);
  return pushforward_gradient_at(map, theta, g);
}

}  // namespace

double target_proposal_log_density(const TriangularMap& map, const ReferenceProposal& prop,
                                   const Eigen::VectorXd& theta_new,
                                   const Eigen::VectorXd& theta, double sigma2_m,
                                   const TargetDensity* target) {
  double log_det_new = 0.0;
  const Eigen::VectorXd r_new = map.forward_with_log_det(theta_new, log_det_new);
  const Eigen::VectorXd r = map.forward(theta);
  Eigen::VectorXd grad;
  if (needs_gradient(prop)) grad = reference_gradient(map, target, theta);
  return reference_log_density(prop, r_new, r, sigma2_m, needs_gradient(prop) ? &grad : nullptr) +
         log_det_new;
}

double mh_accept_log_ratio(const TargetDensity& target, const TriangularMap& map,
                           const ReferenceProposal& prop, const Eigen::VectorXd& theta,
                           const Eigen::VectorXd& theta_new, double sigma2_m) {
  const double lp_new = target.log_density(theta_new);
  if (!(lp_new > kNegInf) || std::isnan(lp_new)) return kNegInf;
  const double lp = target.log_density(theta);
  const double fwd = target_proposal_log_density(map, prop, theta_new, theta, sigma2_m, &target);
  const double rev = target_proposal_log_density(map, prop, theta, theta_new, sigma2_m, &target);
  return lp_new - lp + rev - fwd;
}

double dr_two_stage_accept_reference(const StageKernel& q1, const StageKernel& q2,
                                     const Eigen::VectorXd& rx, double px,
                                     const Eigen::VectorXd& r1, double p1,
                                     const Eigen::VectorXd& r2, double p2) {
  if (!(p2 > kNegInf)) return 0.0;
  const double log_a1_x =
      p1 > kNegInf ? std::min(0.0, p1 - px + q1.log_density(rx, r1) - q1.log_density(r1, rx)) : kNegInf;
  const double log_a1_y2 =
      p1 > kNegInf ? std::min(0.0, p1 - p2 + q1.log_density(r2, r1) - q1.log_density(r1, r2)) : kNegInf;
  // 1 - alpha_1 = 0 on either path makes the second stage a null move.
  if (log_a1_x == 0.0 || log_a1_y2 == 0.0) return 0.0;
  const double num = p2 + q1.log_density(r1, r2) + q2.log_density(rx, r2) + log1m_exp(log_a1_y2);
  const double den = px + q1.log_density(r1, rx) + q2.log_density(r2, rx) + log1m_exp(log_a1_x);
  const double log_ratio = num - den;
  if (std::isnan(log_ratio)) return 0.0;
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

double dr_two_stage_accept(const TargetDensity& target, const TriangularMap& map,
                           const ReferenceProposal& prop, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y1, const Eigen::VectorXd& y2,
                           double scale_factor) {
  if (stage_count(prop) != 2) throw Error("two-stage acceptance needs a delayed-rejection proposal");
  const auto stages = stage_kernels(prop, 0.0, scale_factor);
  auto reduced = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& r) {
    const double lp = target.log_density(theta);
    double log_det = 0.0;
    r = map.forward_with_log_det(theta, log_det);
    return lp > kNegInf ? lp - log_det : kNegInf;
  };
  Eigen::VectorXd rx, r1, r2;
  const double px = reduced(x, rx);
  const double p1 = reduced(y1, r1);
  const double p2 = reduced(y2, r2);
  return dr_two_stage_accept_reference(stages[0], stages[1], rx, px, r1, p1, r2, p2);
}

}  // namespace tmcmc
