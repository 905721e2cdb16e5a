#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "tmcmc/random.hpp"
#include "tmcmc/target.hpp"
#include "tmcmc/transport_map.hpp"

namespace tmcmc {

struct RandomWalk {
  double sigma = 1.0;
};

/// Langevin proposal N(r + (dt^2/2) grad log p~(r), dt^2 I).
struct Mala {
  double step = 1.0;
};

/// Stage 1: independence draw from N(0, I). Stage 2: random walk of scale
/// sigma2 around the current state.
struct DelayedRejectionGlobal {
  double sigma2 = 0.5;
};

/// Two random walks around the current state, sigma1 > sigma2.
struct DelayedRejectionLocal {
  double sigma1 = 1.0;
  double sigma2 = 0.3;
};

/// w N(0, I) + (1 - w) N(r, sigma^2 I) with w = w_max / (1 + w_scale s2),
/// where s2 is the current map-quality estimate.
struct Mixture {
  double w_max = 0.9;
  double w_scale = 1.0;
  double sigma = 1.0;
};

using ReferenceProposal =
    std::variant<RandomWalk, Mala, DelayedRejectionGlobal, DelayedRejectionLocal, Mixture>;

/// Throws tmcmc::Error on non-positive scales, w_max outside [0, 1) or
/// sigma1 <= sigma2.
void validate(const ReferenceProposal& prop);
std::string_view proposal_name(const ReferenceProposal& prop);
bool needs_gradient(const ReferenceProposal& prop);
int stage_count(const ReferenceProposal& prop);

double mixture_weight(const Mixture& mix, double sigma2_m);

/// One stage of a reference-space kernel. Walk-type stages are centred at
/// the current state; Langevin stages shift by (scale^2/2) times the
/// supplied gradient.
struct StageKernel {
  enum class Kind { kIndependence, kWalk, kLangevin, kMixture };
  Kind kind = Kind::kWalk;
  double scale = 1.0;
  double weight = 0.0;  ///< independence weight for kMixture

  /// log q(to | from). `grad_from` is read only for kLangevin.
  double log_density(const Eigen::VectorXd& to, const Eigen::VectorXd& from,
                     const Eigen::VectorXd* grad_from = nullptr) const;
  Eigen::VectorXd sample(const Eigen::VectorXd& from, Rng& rng,
                         const Eigen::VectorXd* grad_from = nullptr) const;
  bool symmetric() const noexcept { return kind == Kind::kWalk; }
  bool tunable() const noexcept { return kind != Kind::kIndependence; }
};

/// Stage kernels of a proposal; `scale_factor` multiplies every tunable scale.
std::vector<StageKernel> stage_kernels(const ReferenceProposal& prop, double sigma2_m,
                                       double scale_factor = 1.0);

/// log q_r(r_new | r). MALA needs the reference gradient at r.
double reference_log_density(const ReferenceProposal& prop, const Eigen::VectorXd& r_new,
                             const Eigen::VectorXd& r, double sigma2_m,
                             const Eigen::VectorXd* grad_r = nullptr);

struct ProposalOutcome {
  Eigen::VectorXd point;
  int stage = 1;
  double log_forward = 0.0;
  /// log q_r(r | r_new); NaN for Langevin proposals, whose reverse density
  /// needs the gradient at the new point.
  double log_reverse = 0.0;
};

/// First-stage draw of `prop` from r.
ProposalOutcome propose(const ReferenceProposal& prop, const Eigen::VectorXd& r, Rng& rng,
                        double sigma2_m, const Eigen::VectorXd* grad_r = nullptr);

/// log q_theta(theta_new | theta) = log q_r(T theta_new | T theta) + log det DT(theta_new).
/// For multi-stage proposals this is the first-stage density.
double target_proposal_log_density(const TriangularMap& map, const ReferenceProposal& prop,
                                   const Eigen::VectorXd& theta_new,
                                   const Eigen::VectorXd& theta, double sigma2_m,
                                   const TargetDensity* target = nullptr);

/// log pi(theta') - log pi(theta) + log q(theta | theta') - log q(theta' | theta)
/// for the first stage. Returns -infinity when pi(theta') = 0. MALA needs a
/// target with a gradient.
double mh_accept_log_ratio(const TargetDensity& target, const TriangularMap& map,
                           const ReferenceProposal& prop, const Eigen::VectorXd& theta,
                           const Eigen::VectorXd& theta_new, double sigma2_m);

/// Second-stage delayed-rejection acceptance probability for the move
/// x -> y2 after the first-stage proposal y1 was rejected. Only defined for
/// the two delayed-rejection variants.
double dr_two_stage_accept(const TargetDensity& target, const TriangularMap& map,
                           const ReferenceProposal& prop, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y1, const Eigen::VectorXd& y2,
                           double scale_factor = 1.0);

/// Reference-space form of the two-stage probability. `p_*` are
/// log pi - log det DT at each point (-infinity for zero density) and
/// `r_*` the reference images.
double dr_two_stage_accept_reference(const StageKernel& q1, const StageKernel& q2,
                                     const Eigen::VectorXd& rx, double px,
                                     const Eigen::VectorXd& r1, double p1,
                                     const Eigen::VectorXd& r2, double p2);

}  // namespace tmcmc
