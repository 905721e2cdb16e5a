#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tmcmc/map_optimizer.hpp"
#include "tmcmc/polybasis.hpp"
#include "tmcmc/proposals.hpp"
#include "tmcmc/random.hpp"
#include "tmcmc/target.hpp"
#include "tmcmc/transport_map.hpp"

namespace tmcmc {

struct ChainConfig {
  long steps = 10000;         ///< L
  long burn_in = 0;
  long adapt_interval = 500;  ///< K_U
  long adapt_start = -1;      ///< negative: max(K_U, 500)
  bool adapt = true;
  std::uint64_t seed = 0;
  ReferenceProposal proposal = RandomWalk{};
  BasisSpec basis;
  OptimizerConfig optimizer;
  double radius = TriangularMap::kUnbounded;
  /// Burn-in only: every `tune_interval` attempts of the first non-independence
  /// stage, scale *= exp(2 (rate - target_acceptance)).
  bool tune = true;
  double target_acceptance = 0.3;
  long tune_interval = 50;
  long sigma2_window = 2000;
  bool parallel_fit = true;

  long first_adaptation() const noexcept;
  /// Throws tmcmc::Error when the configuration is inconsistent.
  void validate() const;
};

struct AdaptationRecord {
  long step = 0;               ///< first step that uses the refitted map
  double sigma2_before = 0.0;  ///< monitor under the outgoing map
  double sigma2_after = 0.0;   ///< monitor under the refitted map
  bool applied = false;
  std::vector<int> newton_iterations;
  double seconds = 0.0;
  std::string error;
};

struct MapSnapshot {
  long step = 0;  ///< first step at which the map is used
  MapPtr map;
};

struct ChainResult {
  std::string method;
  std::uint64_t seed = 0;
  long burn_in = 0;
  /// Row k is the state after step k + 1.
  Eigen::MatrixXd samples;
  /// 0 when step k was rejected, otherwise the accepting stage (1 or 2).
  std::vector<std::uint8_t> accepted_stage;
  /// Fresh target evaluations made during step k.
  std::vector<std::uint8_t> evaluations;
  std::array<long, 2> stage_attempts{};
  std::array<long, 2> stage_accepts{};
  long proposal_failures = 0;
  std::vector<AdaptationRecord> adaptations;
  std::vector<MapSnapshot> maps;
  double scale_factor = 1.0;  ///< proposal scale multiplier after burn-in tuning
  double seconds = 0.0;

  long steps() const noexcept { return static_cast<long>(samples.rows()); }
  long total_evaluations() const;
  /// Fraction of accepted steps in [from, to); `to < 0` means the end.
  double acceptance_rate(long from = 0, long to = -1) const;
  std::vector<double> sigma2_history() const;
};

/// Cached quantities at the current state under one map.
struct ChainState {
  Eigen::VectorXd theta;
  double log_target = 0.0;     ///< log pi(theta)
  Eigen::VectorXd target_grad;  ///< only when gradients are tracked
  Eigen::VectorXd r;            ///< T(theta)
  double reduced = 0.0;         ///< log pi(theta) - log det DT(theta)
  Eigen::VectorXd r_grad;       ///< reference gradient, only with gradients

  /// Evaluates the target once at theta and maps it. Throws tmcmc::Error if
  /// the density is zero or not finite there.
  static ChainState start(const TargetDensity& target, const TriangularMap& map,
                          const Eigen::VectorXd& theta, bool with_gradient);
  /// Recomputes the reference image under a new map without touching the target.
  void remap(const TriangularMap& map);
};

struct StepOutcome {
  int accepted_stage = 0;
  int evaluations = 0;
  int stages_tried = 0;
  int failures = 0;  ///< proposals whose preimage could not be computed
};

/// One (possibly two-stage) Metropolis-Hastings step in reference space.
/// A proposal that cannot be inverted or is not monotone counts as a rejection.
StepOutcome mh_step(ChainState& state, const TriangularMap& map,
                    const std::vector<StageKernel>& stages, const TargetDensity& target, Rng& rng);

StepOutcome mh_step(ChainState& state, const TriangularMap& map, const ReferenceProposal& prop,
                    const TargetDensity& target, Rng& rng, double sigma2_m,
                    double scale_factor = 1.0);

/// Unbiased variance of log pi - log N(T theta; 0, I) - log det DT over the rows.
double estimate_sigma2_m(const TriangularMap& map, const Eigen::MatrixXd& samples,
                         const Eigen::VectorXd& log_target);
double estimate_sigma2_m(const TargetDensity& target, const TriangularMap& map,
                         const Eigen::MatrixXd& samples);

/// Runs the adaptive transport-map chain from theta0.
ChainResult run_adaptive(const ChainConfig& cfg, const TargetDensity& target,
                         const Eigen::VectorXd& theta0);

}  // namespace tmcmc
